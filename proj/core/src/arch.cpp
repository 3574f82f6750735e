#include "painbench/arch.hpp"

#include "painbench/error.hpp"

namespace painbench::zoo {

// Input sides for the pretrained group follow the published Keras
// definitions. SongNet, WeiNet and SilNet are reconstructions from
// their original publications; their sides and parameter counts are the
// reconstruction's, not authoritative. tiny_cnn is a desk-scale
// reference net used by the test and fixture pipelines.
const std::vector<ArchitectureSpec>& architecture_registry() {
    static const std::vector<ArchitectureSpec> registry = {
        {"alexnet", 227, false, 58'289'538},
        {"songnet", 64, false, 70'242},
        {"weinet", 64, false, 101'802},
        {"vgg16", 224, true, 138'357'544},
        {"vgg19", 224, true, 143'667'240},
        {"resnet50", 224, true, 25'636'712},
        {"resnet101v2", 224, true, 44'675'560},
        {"inception_v3", 299, true, 23'851'784},
        {"xception", 299, true, 22'910'480},
        {"silnet", 100, false, 127'810},
        {"tiny_cnn", 64, false, 6'098},
    };
    return registry;
}

bool is_known_architecture(const std::string& name) {
    for (const auto& spec : architecture_registry())
        if (spec.name == name) return true;
    return false;
}

const ArchitectureSpec& architecture(const std::string& name) {
    for (const auto& spec : architecture_registry())
        if (spec.name == name) return spec;
    fail("UnknownArchitecture", "'" + name + "' is not in the architecture registry");
}

}  // namespace painbench::zoo
