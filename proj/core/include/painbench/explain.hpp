#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "painbench/model_zoo.hpp"
#include "painbench/preprocess.hpp"

namespace painbench::explain {

struct SegmentMap {
    cv::Mat1i grid;  // entries in 0..n_segments-1, partitioning the image
    int n_segments = 0;
};

// Near-square cells approximating the requested segment count; lets
// the surrogate fit stay deterministic and resolution-independent.
SegmentMap grid_segments(int rows, int cols, int n_segments);

struct LimeParams {
    int n_segments = 50;
    int n_perturbations = 1000;
    double kernel_width = 0.25;  // cosine-distance exponential kernel
    int top_k = 5;
    uint64_t seed = 0;
};

struct LocalExplanation {
    std::string sample_id;
    data::PainClass target_class = data::PainClass::PAIN;
    std::vector<double> segment_weights;
    double surrogate_r2 = 0.0;
    cv::Mat1b mask;  // union of the top-k positive-weight segments
    SegmentMap segments;
};

struct GlobalHeatmap {
    cv::Mat1d grid;  // canonical face space, values in [0,1]
    std::string model;
    data::PainClass pain_class = data::PainClass::PAIN;
    std::string dataset;
    int n_samples = 0;
};

inline constexpr int kCanonicalSide = 100;
// Canonical landmark positions in the unit square.
inline const cv::Point2d kCanonicalLeftEye{0.3, 0.35};
inline const cv::Point2d kCanonicalRightEye{0.7, 0.35};
inline const cv::Point2d kCanonicalMouth{0.5, 0.75};

using PredictFn = std::function<zoo::Prediction(const cv::Mat& image)>;

// Perturbation-based local surrogate attribution: random segment
// on/off vectors, off segments filled with the image mean color, and
// a distance-kernel-weighted ridge fit of the target-class
// probability. Deterministic given params.seed.
LocalExplanation lime_explain(const PredictFn& model, const cv::Mat& image,
                              data::PainClass target_class, const LimeParams& params);
LocalExplanation lime_explain(const zoo::TrainedModelRecord& record,
                              const prep::PreprocessedImage& image, data::PainClass target_class,
                              const LimeParams& params);

// Similarity transform mapping the detected eye/mouth landmarks onto
// the canonical positions, resampled to a side x side grid. Values
// carry a Jacobian factor so total mask mass is preserved.
// Throws DegenerateLandmarks for coincident or collinear landmarks.
cv::Mat1d warp_to_canonical(const cv::Mat1d& grid, const prep::FaceLandmarks& landmarks,
                            int side = kCanonicalSide);

// Cell-wise mean of the warped per-sample masks, then min-max
// normalized to [0,1] (constant grids map to all zeros).
GlobalHeatmap aggregate_heatmap(const std::vector<LocalExplanation>& explanations,
                                const std::vector<prep::FaceLandmarks>& landmarks,
                                const std::string& model, data::PainClass pain_class,
                                const std::string& dataset, int side = kCanonicalSide);

// Colorized model x (class, dataset) panel grid over a canonical face
// outline, written as a PNG.
void render_heatmaps(const std::vector<GlobalHeatmap>& heatmaps,
                     const std::filesystem::path& png_path);

// Raw grid values as CSV (one row per grid row).
void write_heatmap_grid(const GlobalHeatmap& heatmap, const std::filesystem::path& csv_path);

}  // namespace painbench::explain
