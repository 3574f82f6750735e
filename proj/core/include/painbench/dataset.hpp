#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace painbench::data {

enum class DatasetTag { mint, delaware, unbc, cppain, synthetic };

DatasetTag parse_dataset_tag(const std::string& s);  // throws UnknownDatasetTag
std::string to_string(DatasetTag tag);

enum class PainClass { NO_PAIN = 0, PAIN = 1 };

PainClass parse_pain_class(const std::string& s);
std::string to_string(PainClass c);

enum class Stimulus { injection, stretching, other, unknown };

Stimulus parse_stimulus(const std::string& s);
std::string to_string(Stimulus s);

struct SubjectID {
    DatasetTag dataset_tag;
    std::string local_id;

    auto operator<=>(const SubjectID&) const = default;
};

struct ImageSample {
    SubjectID subject;
    std::filesystem::path image_path;
    PainClass pain_class = PainClass::NO_PAIN;
    std::optional<int> raw_level;    // 0-based original pain level
    std::optional<int> frame_index;  // present for video-derived sources
    Stimulus stimulus = Stimulus::unknown;

    std::string id() const;  // "tag:local_id:<frame or file stem>" stable identifier
};

// An immutable, deterministically ordered sample list. Order is
// (dataset_tag, local_id, frame_index, image_path).
struct Corpus {
    std::string name;
    std::vector<ImageSample> samples;
};

struct SubjectClinicalRecord {
    SubjectID subject;
    std::optional<int> gmfcs_level;  // 1..5
    std::optional<int> cfcs_level;   // 1..5
    std::optional<std::string> cp_subtype;
};

struct DatasetSummaryRow {
    std::string dataset;
    int subjects = 0;
    int images = 0;
    int pain = 0;
    int no_pain = 0;
};

struct CorpusSummary {
    std::vector<DatasetSummaryRow> per_dataset;
    DatasetSummaryRow total;
};

// Manifest CSV columns: dataset_tag, local_id, image_path, raw_level,
// pain_class, frame_index, stimulus (last three optional). Image paths
// are resolved relative to the manifest's directory and must decode.
Corpus load_manifest(const std::filesystem::path& path);

// Uniform temporal subsampling of video-derived samples: each
// (subject, class) group keeps min(n, budget) frames at indices
// round(i*(n-1)/(k-1)) over the frame_index-sorted group. Non-video
// samples pass through untouched.
Corpus sample_frames(const Corpus& corpus, int budget);

Corpus merge(const std::vector<Corpus>& corpora, const std::string& name);

CorpusSummary corpus_summary(const Corpus& corpus);

void sort_samples(std::vector<ImageSample>& samples);

}  // namespace painbench::data
