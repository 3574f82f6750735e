#include "painbench/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <Eigen/Dense>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "painbench/error.hpp"

namespace fs = std::filesystem;

namespace painbench::explain {

SegmentMap grid_segments(int rows, int cols, int n_segments) {
    if (rows <= 0 || cols <= 0 || n_segments < 1)
        fail("SegmentationFailure", "invalid segmentation request");
    int g = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_segments)))));
    g = std::min({g, rows, cols});
    SegmentMap map;
    map.n_segments = g * g;
    map.grid = cv::Mat1i(rows, cols);
    for (int y = 0; y < rows; ++y) {
        int gy = std::min(g - 1, y * g / rows);
        for (int x = 0; x < cols; ++x) {
            int gx = std::min(g - 1, x * g / cols);
            map.grid(y, x) = gy * g + gx;
        }
    }
    return map;
}

LocalExplanation lime_explain(const PredictFn& model, const cv::Mat& image,
                              data::PainClass target_class, const LimeParams& params) {
    if (image.empty() || image.type() != CV_8UC3)
        fail("ShapeMismatch", "LIME needs an 8-bit color image");
    SegmentMap segments = grid_segments(image.rows, image.cols, params.n_segments);
    const int S = segments.n_segments;
    const int N = params.n_perturbations;

    cv::Scalar mean = cv::mean(image);
    cv::Vec3b fill(static_cast<uchar>(mean[0]), static_cast<uchar>(mean[1]),
                   static_cast<uchar>(mean[2]));

    nn::Rng rng(params.seed ^ 0x11a3u);
    Eigen::MatrixXd X(N, S + 1);  // intercept first
    Eigen::VectorXd y(N), w(N);

    cv::Mat perturbed(image.rows, image.cols, CV_8UC3);
    std::vector<char> on(S);
    for (int i = 0; i < N; ++i) {
        int n_on = 0;
        for (int s = 0; s < S; ++s) {
            on[s] = rng.uniform() < 0.5;
            if (on[s]) ++n_on;
            X(i, s + 1) = on[s] ? 1.0 : 0.0;
        }
        X(i, 0) = 1.0;
        for (int yy = 0; yy < image.rows; ++yy) {
            const auto* src = image.ptr<cv::Vec3b>(yy);
            auto* dst = perturbed.ptr<cv::Vec3b>(yy);
            const int* seg = segments.grid.ptr<int>(yy);
            for (int xx = 0; xx < image.cols; ++xx)
                dst[xx] = on[seg[xx]] ? src[xx] : fill;
        }
        zoo::Prediction p = model(perturbed);
        y[i] = target_class == data::PainClass::PAIN ? p.p_pain : p.p_no_pain;
        // cosine distance to the all-on vector
        double d = 1.0 - std::sqrt(static_cast<double>(n_on) / S);
        w[i] = std::exp(-d * d / (params.kernel_width * params.kernel_width));
    }

    Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::MatrixXd gram = X.transpose() * Xw;
    gram.diagonal().array() += 1e-6;  // ridge
    Eigen::VectorXd beta = gram.ldlt().solve(X.transpose() * (w.asDiagonal() * y));

    LocalExplanation out;
    out.target_class = target_class;
    out.segments = segments;
    out.segment_weights.assign(beta.data() + 1, beta.data() + 1 + S);

    Eigen::VectorXd residual = y - X * beta;
    double y_mean = (w.array() * y.array()).sum() / w.sum();
    double ss_res = (w.array() * residual.array().square()).sum();
    double ss_tot = (w.array() * (y.array() - y_mean).square()).sum();
    out.surrogate_r2 = ss_tot > 1e-12 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-9 ? 1.0 : 0.0);

    std::vector<int> positive;
    for (int s = 0; s < S; ++s)
        if (out.segment_weights[s] > 0) positive.push_back(s);
    std::sort(positive.begin(), positive.end(), [&](int a, int b) {
        return out.segment_weights[a] > out.segment_weights[b];
    });
    int keep = std::min<int>(params.top_k, static_cast<int>(positive.size()));
    positive.resize(keep);
    out.mask = cv::Mat1b(image.rows, image.cols, uchar(0));
    for (int yy = 0; yy < image.rows; ++yy)
        for (int xx = 0; xx < image.cols; ++xx)
            if (std::find(positive.begin(), positive.end(), segments.grid(yy, xx)) !=
                positive.end())
                out.mask(yy, xx) = 1;
    return out;
}

LocalExplanation lime_explain(const zoo::TrainedModelRecord& record,
                              const prep::PreprocessedImage& image, data::PainClass target_class,
                              const LimeParams& params) {
    if (image.side != record.architecture.input_side)
        fail("ShapeMismatch", "image side does not match the architecture input");
    auto model = [&record](const cv::Mat& img) {
        prep::PreprocessedImage p;
        p.pixels = img;
        p.side = img.rows;
        return zoo::predict(record, p);
    };
    LocalExplanation out = lime_explain(model, image.pixels, target_class, params);
    out.sample_id = image.sample_id;
    return out;
}

namespace {

struct Similarity {
    double a = 1.0, b = 0.0, tx = 0.0, ty = 0.0;  // x' = a x - b y + tx; y' = b x + a y + ty

    cv::Point2d apply(const cv::Point2d& p) const {
        return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty};
    }
    double scale2() const { return a * a + b * b; }
    Similarity inverse() const {
        double s2 = scale2();
        Similarity inv;
        inv.a = a / s2;
        inv.b = -b / s2;
        inv.tx = (-a * tx - b * ty) / s2;
        inv.ty = (b * tx - a * ty) / s2;
        return inv;
    }
};

// Least-squares similarity from three point pairs.
Similarity fit_similarity(const std::array<cv::Point2d, 3>& src,
                          const std::array<cv::Point2d, 3>& dst) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (cv::norm(src[i] - src[j]) < 1e-9)
                fail("DegenerateLandmarks", "coincident landmarks");
    double cross = (src[1].x - src[0].x) * (src[2].y - src[0].y) -
                   (src[1].y - src[0].y) * (src[2].x - src[0].x);
    if (std::abs(cross) < 1e-9) fail("DegenerateLandmarks", "collinear landmarks");

    Eigen::MatrixXd A(6, 4);
    Eigen::VectorXd rhs(6);
    for (int i = 0; i < 3; ++i) {
        A.row(2 * i) << src[i].x, -src[i].y, 1, 0;
        A.row(2 * i + 1) << src[i].y, src[i].x, 0, 1;
        rhs[2 * i] = dst[i].x;
        rhs[2 * i + 1] = dst[i].y;
    }
    Eigen::Vector4d sol = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
    return {sol[0], sol[1], sol[2], sol[3]};
}

}  // namespace

cv::Mat1d warp_to_canonical(const cv::Mat1d& grid, const prep::FaceLandmarks& landmarks,
                            int side) {
    std::array<cv::Point2d, 3> src = {landmarks.left_eye, landmarks.right_eye, landmarks.mouth};
    std::array<cv::Point2d, 3> dst = {kCanonicalLeftEye * static_cast<double>(side),
                                      kCanonicalRightEye * static_cast<double>(side),
                                      kCanonicalMouth * static_cast<double>(side)};
    Similarity fwd = fit_similarity(src, dst);
    Similarity inv = fwd.inverse();
    // Jacobian factor keeps the summed mass invariant under the warp.
    double mass_scale = 1.0 / fwd.scale2();

    cv::Mat1d out(side, side, 0.0);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            cv::Point2d s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
            int x0 = static_cast<int>(std::floor(s.x));
            int y0 = static_cast<int>(std::floor(s.y));
            double fx = s.x - x0, fy = s.y - y0;
            auto sample = [&](int yy, int xx) -> double {
                if (yy < 0 || yy >= grid.rows || xx < 0 || xx >= grid.cols) return 0.0;
                return grid(yy, xx);
            };
            double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                       fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
            out(y, x) = v * mass_scale;
        }
    }
    return out;
}

GlobalHeatmap aggregate_heatmap(const std::vector<LocalExplanation>& explanations,
                                const std::vector<prep::FaceLandmarks>& landmarks,
                                const std::string& model, data::PainClass pain_class,
                                const std::string& dataset, int side) {
    if (explanations.empty()) fail("EmptyExplanationSet", "no explanations to aggregate");
    if (explanations.size() != landmarks.size())
        fail("EmptyExplanationSet", "explanation/landmark count mismatch");

    cv::Mat1d sum(side, side, 0.0);
    for (size_t i = 0; i < explanations.size(); ++i) {
        cv::Mat1d mask;
        explanations[i].mask.convertTo(mask, CV_64F);
        sum += warp_to_canonical(mask, landmarks[i], side);
    }
    sum /= static_cast<double>(explanations.size());

    double lo, hi;
    cv::minMaxLoc(sum, &lo, &hi);
    GlobalHeatmap heatmap;
    heatmap.model = model;
    heatmap.pain_class = pain_class;
    heatmap.dataset = dataset;
    heatmap.n_samples = static_cast<int>(explanations.size());
    if (hi - lo < 1e-12)
        heatmap.grid = cv::Mat1d(side, side, 0.0);
    else
        heatmap.grid = (sum - lo) / (hi - lo);
    return heatmap;
}

namespace {

void draw_face_outline(cv::Mat& panel) {
    int s = panel.rows;
    auto pt = [s](const cv::Point2d& p) {
        return cv::Point(static_cast<int>(p.x * s), static_cast<int>(p.y * s));
    };
    cv::Scalar line(30, 30, 30);
    cv::ellipse(panel, pt({0.5, 0.52}), cv::Size(static_cast<int>(0.34 * s),
                                                 static_cast<int>(0.44 * s)),
                0, 0, 360, line, 1);
    cv::circle(panel, pt(kCanonicalLeftEye), std::max(1, s / 40), line, 1);
    cv::circle(panel, pt(kCanonicalRightEye), std::max(1, s / 40), line, 1);
    cv::ellipse(panel, pt(kCanonicalMouth), cv::Size(s / 10, s / 25), 0, 0, 360, line, 1);
}

}  // namespace

void render_heatmaps(const std::vector<GlobalHeatmap>& heatmaps, const fs::path& png_path) {
    if (heatmaps.empty()) fail("EmptyExplanationSet", "nothing to render");

    std::vector<std::string> models;
    std::vector<std::pair<data::PainClass, std::string>> columns;
    for (const auto& h : heatmaps) {
        if (std::find(models.begin(), models.end(), h.model) == models.end())
            models.push_back(h.model);
        auto col = std::pair(h.pain_class, h.dataset);
        if (std::find(columns.begin(), columns.end(), col) == columns.end())
            columns.push_back(col);
    }
    std::sort(columns.begin(), columns.end());

    const int side = heatmaps.front().grid.rows;
    const int panel = 2 * side;
    const int label_h = 18, label_w = 110;
    cv::Mat canvas(label_h + static_cast<int>(models.size()) * panel,
                   label_w + static_cast<int>(columns.size()) * panel, CV_8UC3,
                   cv::Scalar(255, 255, 255));

    for (size_t m = 0; m < models.size(); ++m) {
        cv::putText(canvas, models[m], {4, label_h + static_cast<int>(m) * panel + panel / 2},
                    cv::FONT_HERSHEY_SIMPLEX, 0.4, {0, 0, 0}, 1);
        for (size_t c = 0; c < columns.size(); ++c) {
            if (m == 0) {
                std::string title = data::to_string(columns[c].first) + "/" + columns[c].second;
                cv::putText(canvas, title,
                            {label_w + static_cast<int>(c) * panel + 4, label_h - 5},
                            cv::FONT_HERSHEY_SIMPLEX, 0.35, {0, 0, 0}, 1);
            }
            const GlobalHeatmap* hm = nullptr;
            for (const auto& h : heatmaps)
                if (h.model == models[m] && std::pair(h.pain_class, h.dataset) == columns[c])
                    hm = &h;
            if (!hm) continue;
            cv::Mat gray;
            hm->grid.convertTo(gray, CV_8U, 255.0);
            cv::Mat color;
            cv::applyColorMap(gray, color, cv::COLORMAP_JET);
            draw_face_outline(color);
            cv::Mat big;
            cv::resize(color, big, cv::Size(panel, panel), 0, 0, cv::INTER_NEAREST);
            big.copyTo(canvas(cv::Rect(label_w + static_cast<int>(c) * panel,
                                       label_h + static_cast<int>(m) * panel, panel, panel)));
        }
    }
    fs::create_directories(png_path.parent_path());
    cv::imwrite(png_path.string(), canvas);
}

void write_heatmap_grid(const GlobalHeatmap& heatmap, const fs::path& csv_path) {
    fs::create_directories(csv_path.parent_path());
    std::ofstream out(csv_path);
    for (int y = 0; y < heatmap.grid.rows; ++y) {
        for (int x = 0; x < heatmap.grid.cols; ++x) {
            if (x) out << ',';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.9g", heatmap.grid(y, x));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace painbench::explain
