#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "painbench/dataset.hpp"
#include "painbench/preprocess.hpp"
#include "painbench/scales.hpp"

namespace painbench::fixtures {

// Schematic face corpora: a skin-toned elliptical head on a flat
// background, dark eyes and mouth. The class signal is the mouth
// region's shape — PAIN draws a wide open dark mouth, NO_PAIN a thin
// closed line — which makes the classes linearly separable by pixel
// statistics in that region. Same params -> byte-identical corpus.
struct SyntheticFaceParams {
    uint64_t seed = 1;
    int n_subjects = 10;
    int frames_per_subject_per_class = 20;
    int image_side = 96;
    data::DatasetTag tag = data::DatasetTag::synthetic;
    bool video = true;   // emit frame_index
    int levels = 2;      // raw_level scale; pain frames get 1..levels-1
    std::string name = "synthetic";
};

struct GroundTruth {
    cv::Rect face_box;
    prep::FaceLandmarks landmarks;
    cv::Rect feature_box;  // the class-signal (mouth) region
    data::PainClass pain_class = data::PainClass::NO_PAIN;
};

struct GeneratedCorpus {
    data::Corpus corpus;
    std::map<std::string, GroundTruth> truth;  // key: image path relative to out_dir
    std::filesystem::path manifest_path;
    std::filesystem::path ground_truth_path;
};

GeneratedCorpus generate_corpus(const SyntheticFaceParams& params,
                                const std::filesystem::path& out_dir);

// Multi-dataset corpus with fixed per-dataset subject and image
// budgets (Table-2-style bookkeeping targets) behind one manifest.
struct DatasetBudget {
    data::DatasetTag tag = data::DatasetTag::synthetic;
    int n_subjects = 0;
    int n_images = 0;
    bool video = true;
    int levels = 2;
};

GeneratedCorpus generate_multi(const std::vector<DatasetBudget>& budgets, int image_side,
                               uint64_t seed, const std::filesystem::path& out_dir);

// Single image + ground truth, for unit tests.
cv::Mat render_face(int side, data::PainClass pain_class, uint64_t seed, GroundTruth* truth,
                    int offset_x = 0, int offset_y = 0);

// Two-rater scoresheet fixture with stimulus-dependent rater noise
// (stretching closest, injection noisiest) and a few unanimous-zero
// recordings.
std::vector<scales::RaterScoreSheet> generate_scoresheets(int n_recordings, uint64_t seed);

}  // namespace painbench::fixtures
