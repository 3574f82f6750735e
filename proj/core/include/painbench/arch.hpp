#pragma once

#include <string>
#include <vector>

namespace painbench::zoo {

// Pixel convention expected by a network's input tensor.
enum class InputScale { unit };  // 8-bit values mapped to [0,1]

struct ArchitectureSpec {
    std::string name;
    int input_side = 0;
    bool pretrained = false;     // ImageNet-initialized backbone
    long long param_count = 0;   // informational
    InputScale input_scale = InputScale::unit;
};

const std::vector<ArchitectureSpec>& architecture_registry();

bool is_known_architecture(const std::string& name);

// Throws UnknownArchitecture.
const ArchitectureSpec& architecture(const std::string& name);

}  // namespace painbench::zoo
