#pragma once

#include <filesystem>
#include <string>

// Fresh scratch directory under the system temp root, wiped on entry.
inline std::filesystem::path test_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "painbench_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
