#include "painbench/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"
#include "painbench/hash.hpp"
#include "painbench/nn.hpp"

namespace painbench::fixtures {

namespace fs = std::filesystem;
using nlohmann::json;

cv::Mat render_face(int side, data::PainClass pain_class, uint64_t seed, GroundTruth* truth,
                    int offset_x, int offset_y) {
    if (side < 32) fail("DegenerateBox", "fixture side must be >= 32");
    nn::Rng rng(seed);
    auto jit = [&](double frac) { return (rng.uniform() * 2.0 - 1.0) * frac * side; };

    // Bluish-gray background: B > G > R, so the skin rule never fires.
    cv::Mat img(side, side, CV_8UC3, cv::Scalar(182, 164, 150));

    double cx = side * 0.5 + jit(0.03) + offset_x;
    double cy = side * 0.5 + jit(0.03) + offset_y;
    double ax = side * (0.26 + 0.03 * rng.uniform());
    double ay = side * (0.34 + 0.03 * rng.uniform());

    // Skin tone chosen to satisfy the detector's colour rule with margin.
    int b = 135 + static_cast<int>(rng.integer(12));
    int g = 165 + static_cast<int>(rng.integer(12));
    int r = 210 + static_cast<int>(rng.integer(12));
    cv::ellipse(img, cv::Point2d(cx, cy), cv::Size2d(ax, ay), 0, 0, 360,
                cv::Scalar(b, g, r), cv::FILLED, cv::LINE_8);

    double eye_dx = side * 0.12, eye_dy = side * 0.10;
    double eye_r = std::max(2.0, side * 0.035);
    cv::Point2d left_eye(cx - eye_dx, cy - eye_dy);
    cv::Point2d right_eye(cx + eye_dx, cy - eye_dy);
    cv::circle(img, left_eye, static_cast<int>(eye_r), cv::Scalar(40, 40, 40), cv::FILLED);
    cv::circle(img, right_eye, static_cast<int>(eye_r), cv::Scalar(40, 40, 40), cv::FILLED);

    // Mid-gray brows: visible but too bright for the dark-feature
    // landmark rule, lowered on PAIN faces.
    double brow_y = cy - eye_dy - (pain_class == data::PainClass::PAIN ? side * 0.05 : side * 0.07);
    cv::line(img, cv::Point2d(left_eye.x - eye_r, brow_y), cv::Point2d(left_eye.x + eye_r, brow_y),
             cv::Scalar(110, 120, 135), std::max(1, side / 64));
    cv::line(img, cv::Point2d(right_eye.x - eye_r, brow_y),
             cv::Point2d(right_eye.x + eye_r, brow_y), cv::Scalar(110, 120, 135),
             std::max(1, side / 64));

    // Class signal: PAIN has a wide-open dark mouth, NO_PAIN a thin line.
    cv::Point2d mouth(cx, cy + side * 0.18);
    cv::Rect feature;
    if (pain_class == data::PainClass::PAIN) {
        double mx = side * 0.10, my = side * 0.065;
        cv::ellipse(img, mouth, cv::Size2d(mx, my), 0, 0, 360, cv::Scalar(30, 30, 45), cv::FILLED,
                    cv::LINE_8);
        feature = cv::Rect(static_cast<int>(mouth.x - mx), static_cast<int>(mouth.y - my),
                           static_cast<int>(2 * mx) + 1, static_cast<int>(2 * my) + 1);
    } else {
        double mx = side * 0.10;
        int th = std::max(2, side / 48);
        cv::line(img, cv::Point2d(mouth.x - mx, mouth.y), cv::Point2d(mouth.x + mx, mouth.y),
                 cv::Scalar(30, 30, 45), th);
        feature = cv::Rect(static_cast<int>(mouth.x - mx), static_cast<int>(mouth.y - th),
                           static_cast<int>(2 * mx) + 1, 2 * th + 1);
    }

    if (truth) {
        cv::Rect box(static_cast<int>(std::floor(cx - ax)), static_cast<int>(std::floor(cy - ay)),
                     static_cast<int>(std::ceil(2 * ax)) + 1,
                     static_cast<int>(std::ceil(2 * ay)) + 1);
        truth->face_box = box & cv::Rect(0, 0, side, side);
        truth->landmarks = prep::FaceLandmarks{left_eye, right_eye, mouth};
        truth->feature_box = feature & cv::Rect(0, 0, side, side);
        truth->pain_class = pain_class;
    }
    return img;
}

namespace {

struct PlannedImage {
    data::DatasetTag tag;
    std::string local_id;
    data::PainClass pain_class = data::PainClass::NO_PAIN;
    int raw_level = 0;
    std::optional<int> frame_index;
    data::Stimulus stimulus = data::Stimulus::unknown;
};

// Distribute n_images across subjects x {pain, no_pain} as evenly as
// possible, keeping both classes represented for every subject.
std::vector<PlannedImage> plan_dataset(const DatasetBudget& b, nn::Rng& rng) {
    if (b.n_subjects < 1 || b.n_images < 2 * b.n_subjects)
        fail("TooFewImages", "dataset budget needs >= 2 images per subject");
    int groups = b.n_subjects * 2;
    std::vector<int> counts(groups, b.n_images / groups);
    for (int i = 0; i < b.n_images % groups; ++i) ++counts[i];

    const data::Stimulus pain_stims[] = {data::Stimulus::injection, data::Stimulus::stretching,
                                         data::Stimulus::other};
    std::vector<PlannedImage> out;
    out.reserve(static_cast<size_t>(b.n_images));
    for (int s = 0; s < b.n_subjects; ++s) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%03d", s);
        int frame = 0;
        for (int cls = 0; cls < 2; ++cls) {
            auto pc = cls == 0 ? data::PainClass::NO_PAIN : data::PainClass::PAIN;
            int n = counts[s * 2 + cls];
            for (int f = 0; f < n; ++f) {
                PlannedImage p;
                p.tag = b.tag;
                p.local_id = buf;
                p.pain_class = pc;
                p.raw_level = pc == data::PainClass::PAIN
                                  ? 1 + static_cast<int>(rng.integer(
                                            static_cast<uint64_t>(std::max(1, b.levels - 1))))
                                  : 0;
                if (b.video) p.frame_index = frame++;
                p.stimulus = pc == data::PainClass::PAIN ? pain_stims[rng.integer(3)]
                                                         : data::Stimulus::unknown;
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

GeneratedCorpus materialize(const std::vector<PlannedImage>& plan, int image_side, uint64_t seed,
                            const fs::path& out_dir, const std::string& name) {
    fs::create_directories(out_dir);
    csv::Table manifest;
    manifest.header = {"dataset_tag", "local_id",    "image_path", "raw_level",
                       "pain_class",  "frame_index", "stimulus"};
    json gt = json::object();

    std::map<std::string, GroundTruth> truth;
    int counter = 0;
    for (const auto& p : plan) {
        std::string tag = data::to_string(p.tag);
        fs::path rel = fs::path("images") / tag / p.local_id /
                       (data::to_string(p.pain_class) + "_" +
                        std::to_string(p.frame_index.value_or(counter)) + ".png");
        fs::create_directories(out_dir / rel.parent_path());

        uint64_t img_seed = fnv1a(tag + ":" + p.local_id + ":" + rel.filename().string(), seed);
        GroundTruth t;
        cv::Mat img = render_face(image_side, p.pain_class, img_seed, &t);
        if (!cv::imwrite((out_dir / rel).string(), img))
            fail("MissingImageFile", "could not write " + (out_dir / rel).string());

        manifest.rows.push_back({tag, p.local_id, rel.generic_string(),
                                 std::to_string(p.raw_level), data::to_string(p.pain_class),
                                 p.frame_index ? std::to_string(*p.frame_index) : "",
                                 data::to_string(p.stimulus)});
        gt[rel.generic_string()] = {
            {"face_box", {t.face_box.x, t.face_box.y, t.face_box.width, t.face_box.height}},
            {"left_eye", {t.landmarks.left_eye.x, t.landmarks.left_eye.y}},
            {"right_eye", {t.landmarks.right_eye.x, t.landmarks.right_eye.y}},
            {"mouth", {t.landmarks.mouth.x, t.landmarks.mouth.y}},
            {"feature_box",
             {t.feature_box.x, t.feature_box.y, t.feature_box.width, t.feature_box.height}},
            {"pain_class", data::to_string(p.pain_class)},
        };
        truth[rel.generic_string()] = t;
        ++counter;
    }

    GeneratedCorpus result;
    result.manifest_path = out_dir / "manifest.csv";
    result.ground_truth_path = out_dir / "ground_truth.json";
    csv::write_file(result.manifest_path, manifest);
    std::ofstream(result.ground_truth_path) << gt.dump(2) << "\n";
    result.corpus = data::load_manifest(result.manifest_path);
    result.corpus.name = name;
    result.truth = std::move(truth);
    return result;
}

}  // namespace

GeneratedCorpus generate_corpus(const SyntheticFaceParams& params, const fs::path& out_dir) {
    DatasetBudget b;
    b.tag = params.tag;
    b.n_subjects = params.n_subjects;
    b.n_images = params.n_subjects * 2 * params.frames_per_subject_per_class;
    b.video = params.video;
    b.levels = params.levels;
    nn::Rng rng(params.seed);
    auto plan = plan_dataset(b, rng);
    return materialize(plan, params.image_side, params.seed, out_dir, params.name);
}

GeneratedCorpus generate_multi(const std::vector<DatasetBudget>& budgets, int image_side,
                               uint64_t seed, const fs::path& out_dir) {
    nn::Rng rng(seed);
    std::vector<PlannedImage> plan;
    for (const auto& b : budgets) {
        auto part = plan_dataset(b, rng);
        plan.insert(plan.end(), part.begin(), part.end());
    }
    return materialize(plan, image_side, seed, out_dir, "multi");
}

std::vector<scales::RaterScoreSheet> generate_scoresheets(int n_recordings, uint64_t seed) {
    if (n_recordings < 2) fail("TooFewSubjects", "need at least two recordings");
    nn::Rng rng(seed);
    const data::Stimulus stims[] = {data::Stimulus::injection, data::Stimulus::stretching,
                                    data::Stimulus::other};
    std::vector<scales::RaterScoreSheet> out;
    out.reserve(static_cast<size_t>(n_recordings) * 2);
    for (int i = 0; i < n_recordings; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "rec%03d", i);
        data::Stimulus stim = stims[i % 3];
        bool no_pain = i % 7 == 0;  // a handful of unanimous-zero recordings

        // Stimulus-dependent rater disagreement: stretching raters track
        // each other closely, injection raters least so.
        double noise = stim == data::Stimulus::stretching ? 0.5
                       : stim == data::Stimulus::other    ? 1.0
                                                          : 1.7;

        scales::AUIntensities base;
        if (!no_pain) {
            base.au4 = static_cast<int>(rng.integer(6));
            base.au6 = static_cast<int>(rng.integer(6));
            base.au7 = static_cast<int>(rng.integer(6));
            base.au9 = static_cast<int>(rng.integer(6));
            base.au10 = static_cast<int>(rng.integer(6));
            base.au43 = static_cast<int>(rng.integer(6));
        }
        std::vector<int> base_items(scales::kNcapcItemCount, 0);
        if (!no_pain)
            for (auto& v : base_items) v = static_cast<int>(rng.integer(4));

        for (int rater = 0; rater < 2; ++rater) {
            auto wiggle = [&](int v, int lo, int hi) {
                if (rater == 0 || no_pain) return std::clamp(v, lo, hi);
                int d = static_cast<int>(std::lround(rng.normal() * noise));
                return std::clamp(v + d, lo, hi);
            };
            scales::RaterScoreSheet s;
            s.rater_id = rater == 0 ? "rater_a" : "rater_b";
            s.recording_id = buf;
            s.stimulus = stim;
            scales::AUIntensities au;
            au.au4 = wiggle(base.au4, 0, 5);
            au.au6 = wiggle(base.au6, 0, 5);
            au.au7 = wiggle(base.au7, 0, 5);
            au.au9 = wiggle(base.au9, 0, 5);
            au.au10 = wiggle(base.au10, 0, 5);
            au.au43 = wiggle(base.au43, 0, 5);
            s.facs = au;
            int facs = scales::facs_pain_score(au);
            s.wong_baker = no_pain ? 0 : std::clamp(2 * ((facs + 2) / 4), 0, 10);
            std::vector<int> items(scales::kNcapcItemCount);
            for (int k = 0; k < scales::kNcapcItemCount; ++k)
                items[k] = wiggle(base_items[static_cast<size_t>(k)], 0, 3);
            s.ncapc_items = items;
            s.ncapc_total = scales::ncapc_total(items);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace painbench::fixtures
