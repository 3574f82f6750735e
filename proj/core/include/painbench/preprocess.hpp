#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "painbench/dataset.hpp"

namespace painbench::prep {

struct FaceBox {
    int x = 0, y = 0, w = 0, h = 0;
    double confidence = 0.0;

    cv::Rect rect() const { return {x, y, w, h}; }
    cv::Point2d center() const { return {x + w / 2.0, y + h / 2.0}; }
};

struct PersonMask {
    cv::Mat1b grid;  // 1 = person, 0 = background; same dims as the image

    double coverage() const;  // person fraction of the grid
};

struct FaceLandmarks {
    cv::Point2d left_eye;
    cv::Point2d right_eye;
    cv::Point2d mouth;
};

struct Provenance {
    FaceBox crop_box;
    double margin = 0.0;
    double mask_coverage = 0.0;
};

struct PreprocessedImage {
    cv::Mat pixels;  // square 8UC3
    int side = 0;
    std::string sample_id;
    Provenance provenance;
};

// Detector and segmenter are consumed as black-box components behind
// these interfaces. The bundled implementations are classical
// stand-ins tuned for the schematic fixture corpora; a CNN-based
// detector/segmenter slots in behind the same interface. Both
// implementations are stateless and shareable across threads.
class FaceDetector {
public:
    virtual ~FaceDetector() = default;
    virtual std::vector<FaceBox> detect(const cv::Mat& image) const = 0;
};

class PersonSegmenter {
public:
    virtual ~PersonSegmenter() = default;
    virtual PersonMask segment(const cv::Mat& image) const = 0;
};

// Finds elliptical skin-toned blobs; confidence combines bounding-box
// fill ratio with relative size.
class SkinBlobFaceDetector : public FaceDetector {
public:
    std::vector<FaceBox> detect(const cv::Mat& image) const override;
};

// Classifies as background every pixel close to the border-dominant
// color or to pure white (the crop padding color).
class BorderColorSegmenter : public PersonSegmenter {
public:
    explicit BorderColorSegmenter(int tolerance = 30) : tolerance_(tolerance) {}
    PersonMask segment(const cv::Mat& image) const override;

private:
    int tolerance_;
};

inline constexpr double kDetectionConfidenceFloor = 0.9;
inline constexpr double kDefaultCropMargin = 0.2;
inline constexpr double kMinMaskCoverage = 0.05;

// Highest-confidence detection above the confidence floor.
// Throws NoFaceDetected.
FaceBox detect_face(const cv::Mat& image, const FaceDetector& detector);

// Square crop of side ceil((1+margin)*max(w,h)) centered on the box
// center; out-of-image regions are padded white.
cv::Mat square_crop(const cv::Mat& image, const FaceBox& box, double margin = kDefaultCropMargin);

// Background pixels forced to (255,255,255). Throws MaskTooSparse when
// person coverage is below kMinMaskCoverage.
cv::Mat subtract_background(const cv::Mat& image, const PersonMask& mask,
                            double* coverage_out = nullptr);

// Bilinear resize to the registered input side of the architecture.
// Pixel values stay 8-bit here; the per-architecture input scaling is
// applied when a network consumes the image.
PreprocessedImage resize_for(const cv::Mat& image, const std::string& architecture_name);

// Eye centers and mouth center on a (preprocessed) schematic face,
// located from the dark facial features. Throws LandmarksNotFound.
FaceLandmarks detect_landmarks(const cv::Mat& image);

// detect -> crop -> segment the crop -> subtract -> resize.
PreprocessedImage preprocess_image(const cv::Mat& image, const FaceDetector& detector,
                                   const PersonSegmenter& segmenter,
                                   const std::string& architecture_name,
                                   double margin = kDefaultCropMargin);

// Cached pipeline over an ImageSample. Outputs land under
// cache_root/<dataset_tag>/<local_id>/<hash>.png with a JSON
// provenance sidecar; a cache hit skips the pipeline.
PreprocessedImage preprocess_sample(const data::ImageSample& sample, const FaceDetector& detector,
                                    const PersonSegmenter& segmenter,
                                    const std::string& architecture_name,
                                    const std::filesystem::path& cache_root,
                                    double margin = kDefaultCropMargin);

}  // namespace painbench::prep
