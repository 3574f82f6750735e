#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "painbench/agreement.hpp"
#include "painbench/dataset.hpp"
#include "painbench/experiments.hpp"
#include "painbench/explain.hpp"
#include "painbench/model_zoo.hpp"

namespace painbench::run {

// Full-workflow configuration: one object drives ingest, the
// preprocessing cache, splits, training, reports and heatmaps.
struct RunConfig {
    std::filesystem::path manifest;                 // merged-corpus manifest
    std::filesystem::path external_manifest;        // optional external test set
    std::filesystem::path scoresheets;              // optional rater scoresheets
    std::filesystem::path run_dir = "painbench_run";
    std::string run_id;                             // empty -> config-derived token
    std::vector<std::string> architectures;
    std::vector<experiments::Scenario> scenarios = {experiments::Scenario::image_centric_cv,
                                                    experiments::Scenario::subject_centric_cv,
                                                    experiments::Scenario::external_test};
    int k = 5;
    uint64_t seed = 7;
    int jobs = 1;
    int frame_budget = 20;  // frames kept per (subject, class) video group
    zoo::TrainConfig train;
    explain::LimeParams lime;
    int explain_samples_per_cell = 4;  // samples per (model, class, dataset)
    std::filesystem::path cache_dir;   // empty -> run_dir/cache; PAINBENCH_CACHE overrides
    std::optional<std::filesystem::path> pretrained_dir;

    void validate() const;
};

// PAINBENCH_CACHE, then config.cache_dir, then run_dir/cache.
std::filesystem::path cache_root(const RunConfig& config);

// Stable per-configuration run token, so reruns of the same
// configuration resume in place under runs/<run_id>/.
std::string effective_run_id(const RunConfig& config);

struct PlannedJob {
    experiments::Scenario scenario;
    std::string architecture;
    int fold = 0;
};

// The (scenario x architecture x fold) training enumeration.
std::vector<PlannedJob> plan_jobs(const RunConfig& config);

void write_plan_csv(const RunConfig& config, const std::filesystem::path& path);

// Manifest load followed by per-(subject, class) frame subsampling.
data::Corpus ingest(const std::filesystem::path& manifest, int frame_budget);

struct RunOutputs {
    std::vector<experiments::EvaluationReport> reports;
    std::vector<explain::GlobalHeatmap> heatmaps;
    std::filesystem::path metrics_csv;
    std::filesystem::path corpus_summary_csv;
    std::vector<std::filesystem::path> figures;
    std::filesystem::path plan_csv;
    std::filesystem::path agreement_csv;  // empty when no scoresheets given
};

// End-to-end pipeline. Layout under run_dir:
//   runs/<run_id>/<scenario>/<arch>/fold<i>/{weights.pbnet, log.csv, predictions.csv}
//   reports/{metrics.csv, corpus_summary.csv, agreement.csv, figures/*.png}
//   explain/<model>/<class>/<dataset>/{heatmap.csv, heatmap.png}
RunOutputs run_all(const RunConfig& config, std::ostream& log);

}  // namespace painbench::run
