#include "painbench/preprocess.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "painbench/arch.hpp"
#include "painbench/error.hpp"
#include "painbench/hash.hpp"

namespace fs = std::filesystem;

namespace painbench::prep {

double PersonMask::coverage() const {
    if (grid.empty()) return 0.0;
    return static_cast<double>(cv::countNonZero(grid)) / (grid.rows * grid.cols);
}

static cv::Mat1b skin_mask(const cv::Mat& image) {
    cv::Mat1b mask(image.rows, image.cols, uchar(0));
    for (int y = 0; y < image.rows; ++y) {
        const auto* row = image.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.cols; ++x) {
            int b = row[x][0], g = row[x][1], r = row[x][2];
            bool skin = r > 150 && g > 110 && b > 80 && r > g && g > b &&
                        (r - b) >= 30 && (r - b) <= 140;
            if (skin) mask(y, x) = 255;
        }
    }
    return mask;
}

std::vector<FaceBox> SkinBlobFaceDetector::detect(const cv::Mat& image) const {
    if (image.empty() || image.type() != CV_8UC3)
        fail("NoFaceDetected", "detector needs a decodable 8-bit color image");
    cv::Mat1b mask = skin_mask(image);
    // Interior facial features (eyes, mouth) punch holes in the skin
    // blob; close them so the fill-ratio confidence reflects the face
    // outline rather than the features.
    int ksize = std::max(3, (std::min(image.rows, image.cols) / 6) | 1);
    cv::morphologyEx(mask, mask, cv::MORPH_CLOSE,
                     cv::getStructuringElement(cv::MORPH_ELLIPSE, {ksize, ksize}));
    cv::Mat labels, stats, centroids;
    int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8);
    std::vector<FaceBox> boxes;
    const double image_area = static_cast<double>(image.rows) * image.cols;
    for (int i = 1; i < n; ++i) {
        int area = stats.at<int>(i, cv::CC_STAT_AREA);
        int w = stats.at<int>(i, cv::CC_STAT_WIDTH);
        int h = stats.at<int>(i, cv::CC_STAT_HEIGHT);
        if (area < 64 || w < 8 || h < 8) continue;
        double fill = area / (0.25 * CV_PI * w * h);
        double size = std::min(1.0, area / (0.01 * image_area));
        FaceBox box;
        box.x = stats.at<int>(i, cv::CC_STAT_LEFT);
        box.y = stats.at<int>(i, cv::CC_STAT_TOP);
        box.w = w;
        box.h = h;
        box.confidence = std::min(1.0, fill) * size;
        boxes.push_back(box);
    }
    return boxes;
}

FaceBox detect_face(const cv::Mat& image, const FaceDetector& detector) {
    auto boxes = detector.detect(image);
    const FaceBox* best = nullptr;
    for (const auto& box : boxes) {
        if (box.confidence < kDetectionConfidenceFloor) continue;
        if (!best || box.confidence > best->confidence) best = &box;
    }
    if (!best) fail("NoFaceDetected", "no detection above confidence " +
                                          std::to_string(kDetectionConfidenceFloor));
    return *best;
}

cv::Mat square_crop(const cv::Mat& image, const FaceBox& box, double margin) {
    if (margin < 0) fail("DegenerateBox", "margin must be >= 0");
    int side = static_cast<int>(std::ceil((1.0 + margin) * std::max(box.w, box.h)));
    if (side <= 0) fail("DegenerateBox", "crop side is zero");
    cv::Point2d c = box.center();
    int x0 = static_cast<int>(std::lround(c.x - side / 2.0));
    int y0 = static_cast<int>(std::lround(c.y - side / 2.0));
    cv::Mat out(side, side, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::Rect src = cv::Rect(x0, y0, side, side) & cv::Rect(0, 0, image.cols, image.rows);
    if (src.area() > 0) {
        cv::Rect dst(src.x - x0, src.y - y0, src.width, src.height);
        image(src).copyTo(out(dst));
    }
    return out;
}

PersonMask BorderColorSegmenter::segment(const cv::Mat& image) const {
    if (image.empty() || image.type() != CV_8UC3)
        fail("MaskTooSparse", "segmenter needs an 8-bit color image");
    // Dominant border color, channel-wise median.
    std::vector<int> bs, gs, rs;
    auto push = [&](const cv::Vec3b& p) {
        bs.push_back(p[0]);
        gs.push_back(p[1]);
        rs.push_back(p[2]);
    };
    for (int x = 0; x < image.cols; ++x) {
        push(image.at<cv::Vec3b>(0, x));
        push(image.at<cv::Vec3b>(image.rows - 1, x));
    }
    for (int y = 0; y < image.rows; ++y) {
        push(image.at<cv::Vec3b>(y, 0));
        push(image.at<cv::Vec3b>(y, image.cols - 1));
    }
    auto median = [](std::vector<int>& v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    cv::Vec3i bg(median(bs), median(gs), median(rs));

    PersonMask mask;
    mask.grid = cv::Mat1b(image.rows, image.cols, uchar(0));
    for (int y = 0; y < image.rows; ++y) {
        const auto* row = image.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.cols; ++x) {
            const cv::Vec3b& p = row[x];
            bool near_bg = std::abs(p[0] - bg[0]) <= tolerance_ &&
                           std::abs(p[1] - bg[1]) <= tolerance_ &&
                           std::abs(p[2] - bg[2]) <= tolerance_;
            bool near_white = p[0] >= 255 - tolerance_ && p[1] >= 255 - tolerance_ &&
                              p[2] >= 255 - tolerance_;
            if (!near_bg && !near_white) mask.grid(y, x) = 1;
        }
    }
    return mask;
}

cv::Mat subtract_background(const cv::Mat& image, const PersonMask& mask, double* coverage_out) {
    if (mask.grid.rows != image.rows || mask.grid.cols != image.cols)
        fail("MaskTooSparse", "mask dimensions do not match the image");
    double cov = mask.coverage();
    if (coverage_out) *coverage_out = cov;
    if (cov < kMinMaskCoverage)
        fail("MaskTooSparse", "person coverage " + std::to_string(cov) + " below " +
                                  std::to_string(kMinMaskCoverage));
    cv::Mat out = image.clone();
    out.setTo(cv::Scalar(255, 255, 255), mask.grid == 0);
    return out;
}

PreprocessedImage resize_for(const cv::Mat& image, const std::string& architecture_name) {
    const auto& spec = zoo::architecture(architecture_name);
    PreprocessedImage out;
    out.side = spec.input_side;
    cv::resize(image, out.pixels, cv::Size(spec.input_side, spec.input_side), 0, 0,
               cv::INTER_LINEAR);
    return out;
}

FaceLandmarks detect_landmarks(const cv::Mat& image) {
    if (image.empty() || image.type() != CV_8UC3)
        fail("LandmarksNotFound", "landmark detection needs an 8-bit color image");
    cv::Mat1b dark(image.rows, image.cols, uchar(0));
    for (int y = 0; y < image.rows; ++y) {
        const auto* row = image.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.cols; ++x) {
            int intensity = (row[x][0] + row[x][1] + row[x][2]) / 3;
            if (intensity < 80) dark(y, x) = 255;
        }
    }
    cv::Mat labels, stats, centroids;
    int n = cv::connectedComponentsWithStats(dark, labels, stats, centroids, 8);
    struct Blob {
        cv::Point2d c;
        int area;
    };
    std::vector<Blob> upper, lower;
    for (int i = 1; i < n; ++i) {
        int area = stats.at<int>(i, cv::CC_STAT_AREA);
        if (area < 4) continue;
        cv::Point2d c(centroids.at<double>(i, 0), centroids.at<double>(i, 1));
        (c.y < image.rows * 0.5 ? upper : lower).push_back({c, area});
    }
    if (upper.size() < 2 || lower.empty())
        fail("LandmarksNotFound", "expected two eye blobs and a mouth blob");
    std::sort(upper.begin(), upper.end(), [](const Blob& a, const Blob& b) {
        return a.area > b.area;
    });
    upper.resize(2);
    std::sort(upper.begin(), upper.end(), [](const Blob& a, const Blob& b) {
        return a.c.x < b.c.x;
    });
    auto mouth = std::max_element(lower.begin(), lower.end(), [](const Blob& a, const Blob& b) {
        return a.area < b.area;
    });
    return {upper[0].c, upper[1].c, mouth->c};
}

PreprocessedImage preprocess_image(const cv::Mat& image, const FaceDetector& detector,
                                   const PersonSegmenter& segmenter,
                                   const std::string& architecture_name, double margin) {
    FaceBox box = detect_face(image, detector);
    cv::Mat crop = square_crop(image, box, margin);
    PersonMask mask = segmenter.segment(crop);
    double coverage = 0;
    cv::Mat clean = subtract_background(crop, mask, &coverage);
    PreprocessedImage out = resize_for(clean, architecture_name);
    out.provenance = {box, margin, coverage};
    return out;
}

static uint64_t cache_key(const data::ImageSample& sample, const std::string& arch,
                          double margin) {
    std::ifstream in(sample.image_path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    uint64_t h = fnv1a(bytes);
    h = fnv1a(arch, h);
    h = fnv1a(std::to_string(margin), h);
    h = fnv1a("preproc-v1", h);
    return h;
}

PreprocessedImage preprocess_sample(const data::ImageSample& sample, const FaceDetector& detector,
                                    const PersonSegmenter& segmenter,
                                    const std::string& architecture_name,
                                    const std::filesystem::path& cache_root, double margin) {
    const auto& spec = zoo::architecture(architecture_name);
    uint64_t key = cache_key(sample, architecture_name, margin);
    fs::path dir = cache_root / data::to_string(sample.subject.dataset_tag) /
                   sample.subject.local_id;
    fs::path png = dir / (hex64(key) + ".png");
    fs::path sidecar = dir / (hex64(key) + ".json");

    if (fs::exists(png) && fs::exists(sidecar)) {
        cv::Mat cached = cv::imread(png.string(), cv::IMREAD_COLOR);
        if (!cached.empty() && cached.rows == spec.input_side && cached.cols == spec.input_side) {
            nlohmann::json j;
            std::ifstream in(sidecar);
            in >> j;
            PreprocessedImage out;
            out.pixels = cached;
            out.side = spec.input_side;
            out.sample_id = sample.id();
            out.provenance.crop_box = {j["crop"]["x"], j["crop"]["y"], j["crop"]["w"],
                                       j["crop"]["h"], j["crop"]["confidence"]};
            out.provenance.margin = j["margin"];
            out.provenance.mask_coverage = j["mask_coverage"];
            return out;
        }
    }

    cv::Mat image = cv::imread(sample.image_path.string(), cv::IMREAD_COLOR);
    if (image.empty()) fail("MissingImageFile", sample.image_path.string());
    PreprocessedImage out = preprocess_image(image, detector, segmenter, architecture_name, margin);
    out.sample_id = sample.id();

    fs::create_directories(dir);
    cv::imwrite(png.string(), out.pixels);
    nlohmann::json j;
    j["source"] = sample.image_path.string();
    j["sample_id"] = out.sample_id;
    j["architecture"] = architecture_name;
    j["crop"] = {{"x", out.provenance.crop_box.x},
                 {"y", out.provenance.crop_box.y},
                 {"w", out.provenance.crop_box.w},
                 {"h", out.provenance.crop_box.h},
                 {"confidence", out.provenance.crop_box.confidence}};
    j["margin"] = out.provenance.margin;
    j["mask_coverage"] = out.provenance.mask_coverage;
    std::ofstream os(sidecar);
    os << j.dump(2) << '\n';
    return out;
}

}  // namespace painbench::prep
