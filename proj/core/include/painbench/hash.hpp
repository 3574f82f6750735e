#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace painbench {

// FNV-1a, stable across runs and platforms; used for cache keys and
// corpus fingerprints.
inline uint64_t fnv1a(std::string_view bytes, uint64_t seed = 14695981039346656037ull) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace painbench
