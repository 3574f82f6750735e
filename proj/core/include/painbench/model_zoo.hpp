#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "painbench/arch.hpp"
#include "painbench/dataset.hpp"
#include "painbench/nn.hpp"
#include "painbench/preprocess.hpp"

namespace painbench::zoo {

struct TrainConfig {
    int epochs = 30;
    double learning_rate = 0.001;
    int batch_size = 32;
    uint64_t seed = 0;
    nn::Augmentation augmentation;

    void validate() const;  // throws on violated invariants
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;      // mean cross-entropy over the epoch's batches
    double accuracy = 0.0;  // on the un-augmented training set after the epoch
};

struct Classifier {
    ArchitectureSpec spec;
    std::shared_ptr<nn::Network> net;
};

// Constructs a registered architecture with a fresh 2-way head.
// Scratch architectures are randomly initialized reconstructions of
// their original publications; pretrained ones require a local ImageNet
// bundle (directory from PAINBENCH_WEIGHTS or pretrained_dir,
// one <name>.pbnet per architecture) and throw
// MissingPretrainedWeights without one.
Classifier build(const std::string& architecture_name,
                 const std::optional<std::filesystem::path>& pretrained_dir = std::nullopt);

struct LabeledImage {
    prep::PreprocessedImage image;
    data::PainClass label = data::PainClass::NO_PAIN;
};

struct TrainedModelRecord {
    ArchitectureSpec architecture;
    TrainConfig config;
    std::filesystem::path weights_path;  // empty until persisted
    uint64_t train_corpus_fingerprint = 0;
    std::vector<EpochLog> training_log;
    std::shared_ptr<nn::Network> net;
};

struct Prediction {
    double p_no_pain = 0.0;
    double p_pain = 0.0;
    data::PainClass predicted = data::PainClass::NO_PAIN;  // ties break to NO_PAIN
};

uint64_t corpus_fingerprint(const std::vector<LabeledImage>& samples);

// Mini-batch Adam over two-class cross-entropy for exactly
// config.epochs epochs; augmentation is applied per training sample
// and all randomness derives from config.seed.
// Throws EmptyCorpus / SingleClassCorpus / ShapeMismatch.
TrainedModelRecord train(Classifier& classifier, const std::vector<LabeledImage>& samples,
                         const TrainConfig& config);

Prediction predict(const TrainedModelRecord& record, const prep::PreprocessedImage& image);

// Weights in the engine-native .pbnet form plus the per-epoch CSV log.
void save_record(const TrainedModelRecord& record, const std::filesystem::path& dir);
TrainedModelRecord load_record(const std::filesystem::path& dir, const std::string& architecture_name,
                               const TrainConfig& config);

}  // namespace painbench::zoo
