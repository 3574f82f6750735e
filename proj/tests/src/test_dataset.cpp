#include <doctest.h>

#include <fstream>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "helpers.hpp"
#include "painbench/dataset.hpp"
#include "painbench/error.hpp"
#include "painbench/fixtures.hpp"

using namespace painbench;
namespace fs = std::filesystem;

namespace {

// In-memory video corpus: frame counts per (subject, class), no disk.
data::Corpus fake_video_corpus(const std::vector<std::pair<int, int>>& group_frames) {
    data::Corpus corpus;
    int subj = 0;
    for (auto [no_pain_n, pain_n] : group_frames) {
        int frame = 0;
        for (int cls = 0; cls < 2; ++cls) {
            int n = cls == 0 ? no_pain_n : pain_n;
            for (int f = 0; f < n; ++f) {
                data::ImageSample s;
                s.subject = {data::DatasetTag::synthetic, "s" + std::to_string(subj)};
                s.pain_class = cls == 0 ? data::PainClass::NO_PAIN : data::PainClass::PAIN;
                s.frame_index = frame++;
                s.image_path = "img_" + std::to_string(subj) + "_" + std::to_string(*s.frame_index);
                corpus.samples.push_back(std::move(s));
            }
        }
        ++subj;
    }
    data::sort_samples(corpus.samples);
    return corpus;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST_CASE("manifest round trip reproduces fixture counts") {
    fs::path dir = test_dir("dataset_roundtrip");
    fixtures::SyntheticFaceParams params;
    params.n_subjects = 3;
    params.frames_per_subject_per_class = 2;
    params.image_side = 64;
    auto gen = fixtures::generate_corpus(params, dir);

    data::Corpus loaded = data::load_manifest(gen.manifest_path);
    CHECK(loaded.samples.size() == 12);

    auto summary = data::corpus_summary(loaded);
    CHECK(summary.total.subjects == 3);
    CHECK(summary.total.images == 12);
    CHECK(summary.total.pain == 6);
    CHECK(summary.total.no_pain == 6);
    REQUIRE(summary.per_dataset.size() == 1);
    CHECK(summary.per_dataset[0].dataset == "synthetic");

    std::set<std::string> ids;
    for (const auto& s : loaded.samples) ids.insert(s.id());
    CHECK(ids.size() == loaded.samples.size());  // ids are unique

    // Deterministic ordering.
    data::Corpus again = data::load_manifest(gen.manifest_path);
    for (size_t i = 0; i < loaded.samples.size(); ++i)
        CHECK(loaded.samples[i].id() == again.samples[i].id());
}

TEST_CASE("manifest validation errors") {
    fs::path dir = test_dir("dataset_errors");
    cv::imwrite((dir / "ok.png").string(), cv::Mat(8, 8, CV_8UC3, cv::Scalar(1, 2, 3)));

    SUBCASE("missing label columns") {
        write_lines(dir / "m.csv", {"dataset_tag,local_id,image_path", "unbc,s1,ok.png"});
        CHECK_THROWS_WITH_AS(data::load_manifest(dir / "m.csv"),
                             doctest::Contains("MissingField"), PipelineError);
    }
    SUBCASE("label contradiction") {
        write_lines(dir / "m.csv",
                    {"dataset_tag,local_id,image_path,raw_level,pain_class",
                     "unbc,s1,ok.png,3,no_pain"});
        CHECK_THROWS_WITH_AS(data::load_manifest(dir / "m.csv"),
                             doctest::Contains("LabelContradiction"), PipelineError);
    }
    SUBCASE("missing image file") {
        write_lines(dir / "m.csv", {"dataset_tag,local_id,image_path,raw_level",
                                    "unbc,s1,absent.png,0"});
        CHECK_THROWS_WITH_AS(data::load_manifest(dir / "m.csv"),
                             doctest::Contains("MissingImageFile"), PipelineError);
    }
    SUBCASE("unknown dataset tag") {
        write_lines(dir / "m.csv",
                    {"dataset_tag,local_id,image_path,raw_level", "nope,s1,ok.png,0"});
        CHECK_THROWS_WITH_AS(data::load_manifest(dir / "m.csv"),
                             doctest::Contains("UnknownDatasetTag"), PipelineError);
    }
    SUBCASE("raw_level zero must mean no_pain, nonzero pain") {
        write_lines(dir / "m.csv", {"dataset_tag,local_id,image_path,raw_level,frame_index",
                                    "unbc,s1,ok.png,0,0", "unbc,s1,ok.png,4,1"});
        auto corpus = data::load_manifest(dir / "m.csv");
        CHECK(corpus.samples[0].pain_class == data::PainClass::NO_PAIN);
        CHECK(corpus.samples[1].pain_class == data::PainClass::PAIN);
    }
}

TEST_CASE("frame sampling keeps min(n, budget) frames per (subject, class)") {
    data::Corpus corpus = fake_video_corpus({{1, 5}, {20, 33}, {60, 2}});
    data::Corpus sampled = data::sample_frames(corpus, 20);

    std::map<std::pair<std::string, data::PainClass>, int> counts;
    for (const auto& s : sampled.samples) ++counts[{s.subject.local_id, s.pain_class}];
    CHECK(counts[{"s0", data::PainClass::NO_PAIN}] == 1);
    CHECK(counts[{"s0", data::PainClass::PAIN}] == 5);
    CHECK(counts[{"s1", data::PainClass::NO_PAIN}] == 20);
    CHECK(counts[{"s1", data::PainClass::PAIN}] == 20);
    CHECK(counts[{"s2", data::PainClass::NO_PAIN}] == 20);
    CHECK(counts[{"s2", data::PainClass::PAIN}] == 2);

    SUBCASE("idempotent") {
        data::Corpus twice = data::sample_frames(sampled, 20);
        REQUIRE(twice.samples.size() == sampled.samples.size());
        for (size_t i = 0; i < twice.samples.size(); ++i)
            CHECK(twice.samples[i].id() == sampled.samples[i].id());
    }
    SUBCASE("deterministic") {
        data::Corpus again = data::sample_frames(corpus, 20);
        REQUIRE(again.samples.size() == sampled.samples.size());
        for (size_t i = 0; i < again.samples.size(); ++i)
            CHECK(again.samples[i].id() == sampled.samples[i].id());
    }
    SUBCASE("frames stay sorted and spread across the group") {
        // 60-frame group sampled to 20 must keep first and last frames.
        std::vector<int> frames;
        for (const auto& s : sampled.samples)
            if (s.subject.local_id == "s2" && s.pain_class == data::PainClass::NO_PAIN)
                frames.push_back(*s.frame_index);
        REQUIRE(frames.size() == 20);
        CHECK(frames.front() == 0);
        CHECK(frames.back() == 59);
        CHECK(std::is_sorted(frames.begin(), frames.end()));
    }
}

TEST_CASE("non-video samples pass through frame sampling untouched") {
    data::Corpus corpus;
    for (int i = 0; i < 30; ++i) {
        data::ImageSample s;
        s.subject = {data::DatasetTag::delaware, "subject"};
        s.pain_class = data::PainClass::PAIN;
        s.image_path = "still_" + std::to_string(i) + ".png";
        corpus.samples.push_back(std::move(s));
    }
    CHECK(data::sample_frames(corpus, 20).samples.size() == 30);
}

TEST_CASE("merge sums corpora and rejects duplicates") {
    data::Corpus a = fake_video_corpus({{2, 2}});
    data::Corpus b = fake_video_corpus({{3, 3}});
    for (auto& s : b.samples) s.subject.dataset_tag = data::DatasetTag::unbc;

    data::Corpus merged = data::merge({a, b}, "pain-db");
    CHECK(merged.samples.size() == 10);
    CHECK(merged.name == "pain-db");

    CHECK_THROWS_WITH_AS(data::merge({a, a}, "dup"), doctest::Contains("DuplicateSample"),
                         PipelineError);
}
