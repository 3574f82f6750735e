#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "painbench/dataset.hpp"
#include "painbench/model_zoo.hpp"

namespace painbench::experiments {

enum class Scenario { image_centric_cv, subject_centric_cv, external_test };

Scenario parse_scenario(const std::string& s);
std::string to_string(Scenario s);

struct Fold {
    std::vector<int> train;  // indices into SplitPlan::samples
    std::vector<int> test;
    uint64_t seed = 0;       // per-fold training seed
};

struct SplitPlan {
    Scenario scenario = Scenario::image_centric_cv;
    int k = 5;
    uint64_t seed = 0;
    std::vector<data::ImageSample> samples;  // corpus (+ external set, appended)
    std::vector<Fold> folds;
};

// image_centric_cv: seeded shuffle, test chunks of size n/k (+-1).
// subject_centric_cv: seeded subject shuffle, contiguous chunks,
// subject-disjoint folds. external_test: k replicas of (full corpus,
// full external corpus) differing only in training seed.
// Throws TooFewSubjects / TooFewImages.
SplitPlan make_splits(const data::Corpus& corpus, Scenario scenario, int k, uint64_t seed,
                      const data::Corpus* external = nullptr);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int support = 0;
};

struct FoldReport {
    double accuracy = 0.0;
    ClassMetrics no_pain;
    ClassMetrics pain;
    double macro_f1 = 0.0;
    // confusion[true][pred], index 0 = NO_PAIN, 1 = PAIN; doubles so
    // the fold average shares the shape.
    std::array<std::array<double, 2>, 2> confusion{};
};

struct EvaluationReport {
    std::string architecture;
    std::string scenario;
    std::vector<FoldReport> per_fold;
    FoldReport averaged;
    FoldReport stddev;
};

// Metrics from raw label/prediction vectors (1 = PAIN). Zero
// denominators give precision/recall/F1 of 0.
FoldReport metrics_from_predictions(const std::vector<int>& labels,
                                    const std::vector<int>& predictions);

struct SamplePrediction {
    std::string sample_id;
    int label = 0;
    zoo::Prediction prediction;
};

// Forward pass over a test set. Throws EmptyTestSet.
FoldReport evaluate(const zoo::TrainedModelRecord& record,
                    const std::vector<zoo::LabeledImage>& test_samples,
                    std::vector<SamplePrediction>* predictions_out = nullptr);

FoldReport average_folds(const std::vector<FoldReport>& folds);
FoldReport stddev_folds(const std::vector<FoldReport>& folds);

// Supplies the preprocessed, labeled image for a sample at a given
// architecture's input side (typically backed by the preprocessing
// cache).
using SampleLoader =
    std::function<zoo::LabeledImage(const data::ImageSample&, const std::string& architecture)>;

// Trains one model per (architecture, fold), evaluates each fold's
// test set and aggregates. Persists weights, logs and predictions
// under run_dir/<scenario>/<arch>/fold<i>/; completed folds are
// detected by fingerprint and skipped.
std::vector<EvaluationReport> run_scenario(const SplitPlan& plan,
                                           const std::vector<std::string>& architectures,
                                           const zoo::TrainConfig& config,
                                           const SampleLoader& loader,
                                           const std::filesystem::path& run_dir, int jobs = 1);

}  // namespace painbench::experiments
