#include "painbench/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"

namespace painbench::data {

DatasetTag parse_dataset_tag(const std::string& s) {
    if (s == "mint") return DatasetTag::mint;
    if (s == "delaware") return DatasetTag::delaware;
    if (s == "unbc") return DatasetTag::unbc;
    if (s == "cppain") return DatasetTag::cppain;
    if (s == "synthetic") return DatasetTag::synthetic;
    fail("UnknownDatasetTag", "'" + s + "' is not a known dataset tag");
}

std::string to_string(DatasetTag tag) {
    switch (tag) {
        case DatasetTag::mint: return "mint";
        case DatasetTag::delaware: return "delaware";
        case DatasetTag::unbc: return "unbc";
        case DatasetTag::cppain: return "cppain";
        case DatasetTag::synthetic: return "synthetic";
    }
    return "?";
}

PainClass parse_pain_class(const std::string& s) {
    if (s == "pain" || s == "PAIN" || s == "1") return PainClass::PAIN;
    if (s == "no_pain" || s == "NO_PAIN" || s == "0") return PainClass::NO_PAIN;
    fail("MissingField", "'" + s + "' is not a pain class");
}

std::string to_string(PainClass c) {
    return c == PainClass::PAIN ? "pain" : "no_pain";
}

Stimulus parse_stimulus(const std::string& s) {
    if (s == "injection") return Stimulus::injection;
    if (s == "stretching") return Stimulus::stretching;
    if (s == "other") return Stimulus::other;
    if (s.empty() || s == "unknown") return Stimulus::unknown;
    fail("MissingField", "'" + s + "' is not a stimulus");
}

std::string to_string(Stimulus s) {
    switch (s) {
        case Stimulus::injection: return "injection";
        case Stimulus::stretching: return "stretching";
        case Stimulus::other: return "other";
        case Stimulus::unknown: return "unknown";
    }
    return "?";
}

std::string ImageSample::id() const {
    std::string s = to_string(subject.dataset_tag) + ":" + subject.local_id;
    if (frame_index)
        s += ":" + std::to_string(*frame_index);
    else
        s += ":" + image_path.stem().string();
    return s;
}

void sort_samples(std::vector<ImageSample>& samples) {
    std::sort(samples.begin(), samples.end(), [](const ImageSample& a, const ImageSample& b) {
        auto ka = std::tuple(a.subject.dataset_tag, a.subject.local_id,
                             a.frame_index.value_or(-1), a.image_path.string());
        auto kb = std::tuple(b.subject.dataset_tag, b.subject.local_id,
                             b.frame_index.value_or(-1), b.image_path.string());
        return ka < kb;
    });
}

Corpus load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        fail("MissingField", "manifest file does not exist: " + path.string());
    auto table = csv::read_file(path);
    int c_tag = table.require_column("dataset_tag");
    int c_local = table.require_column("local_id");
    int c_path = table.require_column("image_path");
    int c_raw = table.column("raw_level");
    int c_class = table.column("pain_class");
    int c_frame = table.column("frame_index");
    int c_stim = table.column("stimulus");
    if (c_raw < 0 && c_class < 0)
        fail("MissingField", "manifest needs a raw_level or pain_class column");

    const auto base = path.parent_path();
    Corpus corpus;
    corpus.name = path.stem().string();
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto where = [&] { return path.filename().string() + " row " + std::to_string(r + 2); };
        ImageSample s;
        if (row[c_tag].empty() || row[c_local].empty() || row[c_path].empty())
            fail("MissingField", "empty dataset_tag/local_id/image_path at " + where());
        s.subject = {parse_dataset_tag(row[c_tag]), row[c_local]};
        s.image_path = base / row[c_path];

        std::optional<int> raw;
        if (c_raw >= 0 && !row[c_raw].empty()) raw = std::stoi(row[c_raw]);
        std::optional<PainClass> cls;
        if (c_class >= 0 && !row[c_class].empty()) cls = parse_pain_class(row[c_class]);
        if (!raw && !cls)
            fail("MissingField", "neither raw_level nor pain_class at " + where());
        if (raw && *raw < 0)
            fail("MissingField", "negative raw_level at " + where());
        if (raw && cls) {
            PainClass expect = *raw >= 1 ? PainClass::PAIN : PainClass::NO_PAIN;
            if (expect != *cls)
                fail("LabelContradiction",
                     "raw_level " + std::to_string(*raw) + " vs " + to_string(*cls) + " at " + where());
        }
        s.raw_level = raw;
        s.pain_class = cls ? *cls : (*raw >= 1 ? PainClass::PAIN : PainClass::NO_PAIN);
        if (c_frame >= 0 && !row[c_frame].empty()) s.frame_index = std::stoi(row[c_frame]);
        if (c_stim >= 0) s.stimulus = parse_stimulus(row[c_stim]);

        if (!std::filesystem::exists(s.image_path))
            fail("MissingImageFile", s.image_path.string() + " at " + where());
        cv::Mat img = cv::imread(s.image_path.string(), cv::IMREAD_COLOR);
        if (img.empty())
            fail("MissingImageFile", "file does not decode to an image: " + s.image_path.string());
        corpus.samples.push_back(std::move(s));
    }
    sort_samples(corpus.samples);
    return corpus;
}

Corpus sample_frames(const Corpus& corpus, int budget) {
    if (budget < 1) fail("MissingField", "frame budget must be >= 1");
    // Group video-derived samples by (subject, class); keep others as-is.
    std::map<std::tuple<DatasetTag, std::string, PainClass>, std::vector<ImageSample>> groups;
    Corpus out;
    out.name = corpus.name;
    for (const auto& s : corpus.samples) {
        if (s.frame_index)
            groups[{s.subject.dataset_tag, s.subject.local_id, s.pain_class}].push_back(s);
        else
            out.samples.push_back(s);
    }
    for (auto& [key, frames] : groups) {
        std::sort(frames.begin(), frames.end(), [](const ImageSample& a, const ImageSample& b) {
            return *a.frame_index < *b.frame_index;
        });
        int n = static_cast<int>(frames.size());
        int k = std::min(n, budget);
        if (k == 1) {
            out.samples.push_back(frames[n / 2]);
            continue;
        }
        std::set<int> picked;
        for (int i = 0; i < k; ++i) {
            double pos = static_cast<double>(i) * (n - 1) / (k - 1);
            picked.insert(static_cast<int>(std::lround(pos)));
        }
        for (int idx : picked) out.samples.push_back(frames[idx]);
    }
    sort_samples(out.samples);
    return out;
}

Corpus merge(const std::vector<Corpus>& corpora, const std::string& name) {
    if (corpora.empty()) fail("MissingField", "merge requires at least one corpus");
    Corpus out;
    out.name = name;
    std::set<std::tuple<DatasetTag, std::string, std::string, int>> seen;
    for (const auto& c : corpora) {
        for (const auto& s : c.samples) {
            auto key = std::tuple(s.subject.dataset_tag, s.subject.local_id,
                                  s.image_path.string(), s.frame_index.value_or(-1));
            if (!seen.insert(key).second)
                fail("DuplicateSample", "sample " + s.id() + " (" + s.image_path.string() +
                                            ") appears more than once");
            out.samples.push_back(s);
        }
    }
    sort_samples(out.samples);
    return out;
}

CorpusSummary corpus_summary(const Corpus& corpus) {
    std::map<DatasetTag, DatasetSummaryRow> rows;
    std::map<DatasetTag, std::set<std::string>> subjects;
    std::set<std::pair<DatasetTag, std::string>> all_subjects;
    CorpusSummary out;
    out.total.dataset = "total";
    for (const auto& s : corpus.samples) {
        auto& row = rows[s.subject.dataset_tag];
        row.dataset = to_string(s.subject.dataset_tag);
        row.images++;
        (s.pain_class == PainClass::PAIN ? row.pain : row.no_pain)++;
        subjects[s.subject.dataset_tag].insert(s.subject.local_id);
        all_subjects.insert({s.subject.dataset_tag, s.subject.local_id});
        out.total.images++;
        (s.pain_class == PainClass::PAIN ? out.total.pain : out.total.no_pain)++;
    }
    for (auto& [tag, row] : rows) {
        row.subjects = static_cast<int>(subjects[tag].size());
        out.per_dataset.push_back(row);
    }
    out.total.subjects = static_cast<int>(all_subjects.size());
    return out;
}

}  // namespace painbench::data
