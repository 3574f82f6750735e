#include "painbench/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"
#include "painbench/hash.hpp"
#include "painbench/preprocess.hpp"
#include "painbench/report.hpp"

namespace painbench::run {

namespace fs = std::filesystem;
namespace exp = painbench::experiments;

void RunConfig::validate() const {
    if (manifest.empty()) fail("MissingField", "run config needs a manifest path");
    if (architectures.empty()) fail("UnknownArchitecture", "run config needs >= 1 architecture");
    for (const auto& a : architectures) zoo::architecture(a);  // throws on unknown names
    if (scenarios.empty()) fail("MissingField", "run config needs >= 1 scenario");
    if (k < 2) fail("TooFewImages", "k must be >= 2");
    if (jobs < 1) fail("MissingField", "jobs must be >= 1");
    if (frame_budget < 1) fail("MissingField", "frame budget must be >= 1");
    bool wants_external = std::find(scenarios.begin(), scenarios.end(),
                                    exp::Scenario::external_test) != scenarios.end();
    if (wants_external && external_manifest.empty())
        fail("MissingField", "external_test scenario needs an external manifest");
    train.validate();
}

fs::path cache_root(const RunConfig& config) {
    if (const char* env = std::getenv("PAINBENCH_CACHE"); env && *env) return fs::path(env);
    if (!config.cache_dir.empty()) return config.cache_dir;
    return config.run_dir / "cache";
}

std::string effective_run_id(const RunConfig& config) {
    if (!config.run_id.empty()) return config.run_id;
    uint64_t h = fnv1a(config.manifest.string());
    h = fnv1a(config.external_manifest.string(), h);
    for (const auto& a : config.architectures) h = fnv1a(a + "|", h);
    for (auto s : config.scenarios) h = fnv1a(exp::to_string(s), h);
    h = fnv1a(std::to_string(config.k) + ":" + std::to_string(config.seed) + ":" +
                  std::to_string(config.train.epochs) + ":" +
                  std::to_string(config.train.batch_size) + ":" +
                  std::to_string(config.frame_budget),
              h);
    return "run-" + hex64(h);
}

std::vector<PlannedJob> plan_jobs(const RunConfig& config) {
    std::vector<PlannedJob> jobs;
    for (auto scenario : config.scenarios)
        for (const auto& arch : config.architectures)
            for (int f = 0; f < config.k; ++f) jobs.push_back({scenario, arch, f});
    return jobs;
}

void write_plan_csv(const RunConfig& config, const fs::path& path) {
    csv::Table table;
    table.header = {"scenario", "architecture", "fold", "seed"};
    for (const auto& job : plan_jobs(config))
        table.rows.push_back({exp::to_string(job.scenario), job.architecture,
                              std::to_string(job.fold),
                              std::to_string(config.seed + 1 + static_cast<uint64_t>(job.fold))});
    csv::write_file(path, table);
}

data::Corpus ingest(const fs::path& manifest, int frame_budget) {
    return data::sample_frames(data::load_manifest(manifest), frame_budget);
}

namespace {

struct ExplainCell {
    std::string arch;
    data::PainClass pain_class;
    std::string dataset;
};

void emit_heatmaps(const RunConfig& config, const data::Corpus& corpus,
                   const data::Corpus* external, const fs::path& run_base,
                   const fs::path& cache, RunOutputs& out, std::ostream& log) {
    prep::SkinBlobFaceDetector detector;
    prep::BorderColorSegmenter segmenter;

    // Pool of candidate samples per (class, dataset tag).
    std::map<std::pair<data::PainClass, std::string>, std::vector<data::ImageSample>> pools;
    auto add = [&](const data::Corpus& c) {
        for (const auto& s : c.samples) {
            auto& pool = pools[{s.pain_class, data::to_string(s.subject.dataset_tag)}];
            if (static_cast<int>(pool.size()) < config.explain_samples_per_cell)
                pool.push_back(s);
        }
    };
    add(corpus);
    if (external) add(*external);

    // Models come from fold 0 of the first scenario run.
    exp::Scenario scenario = config.scenarios.front();
    for (const auto& arch : config.architectures) {
        fs::path fold_dir = run_base / exp::to_string(scenario) / arch / "fold0";
        if (!fs::exists(fold_dir / "weights.pbnet")) continue;
        zoo::TrainConfig fold_config = config.train;
        fold_config.seed = config.seed + 1;
        zoo::TrainedModelRecord record = zoo::load_record(fold_dir, arch, fold_config);

        for (const auto& [key, samples] : pools) {
            const auto& [pain_class, dataset] = key;
            std::vector<explain::LocalExplanation> explanations;
            std::vector<prep::FaceLandmarks> landmarks;
            for (const auto& sample : samples) {
                try {
                    prep::PreprocessedImage img =
                        prep::preprocess_sample(sample, detector, segmenter, arch, cache);
                    prep::FaceLandmarks lm = prep::detect_landmarks(img.pixels);
                    explain::LimeParams params = config.lime;
                    params.seed = fnv1a(sample.id() + "|" + arch, config.lime.seed);
                    explanations.push_back(explain::lime_explain(record, img, pain_class, params));
                    landmarks.push_back(lm);
                } catch (const PipelineError& e) {
                    log << "explain skip " << sample.id() << ": " << e.what() << "\n";
                }
            }
            if (explanations.empty()) continue;
            explain::GlobalHeatmap hm = explain::aggregate_heatmap(explanations, landmarks, arch,
                                                                   pain_class, dataset);
            fs::path cell =
                config.run_dir / "explain" / arch / data::to_string(pain_class) / dataset;
            fs::create_directories(cell);
            explain::write_heatmap_grid(hm, cell / "heatmap.csv");
            explain::render_heatmaps({hm}, cell / "heatmap.png");
            out.heatmaps.push_back(std::move(hm));
        }
    }

    if (!out.heatmaps.empty()) {
        fs::path grid = config.run_dir / "reports" / "figures" / "heatmaps.png";
        explain::render_heatmaps(out.heatmaps, grid);
        out.figures.push_back(grid);
    }
}

}  // namespace

RunOutputs run_all(const RunConfig& config, std::ostream& log) {
    config.validate();
    RunOutputs out;
    fs::path reports_dir = config.run_dir / "reports";
    fs::create_directories(reports_dir / "figures");

    out.plan_csv = reports_dir / "plan.csv";
    write_plan_csv(config, out.plan_csv);
    log << "planned " << plan_jobs(config).size() << " trainings\n";

    data::Corpus corpus = ingest(config.manifest, config.frame_budget);
    log << "ingested " << corpus.samples.size() << " samples\n";
    std::optional<data::Corpus> external;
    if (!config.external_manifest.empty()) {
        external = ingest(config.external_manifest, config.frame_budget);
        log << "external test set: " << external->samples.size() << " samples\n";
    }

    out.corpus_summary_csv = reports_dir / "corpus_summary.csv";
    report::write_corpus_summary_csv(out.corpus_summary_csv, data::corpus_summary(corpus));

    if (!config.scoresheets.empty()) {
        auto sheets = scales::load_scoresheets(config.scoresheets);
        auto agree = agreement::stratified_agreement(sheets);
        out.agreement_csv = reports_dir / "agreement.csv";
        agreement::write_agreement_report(agree, out.agreement_csv,
                                          reports_dir / "agreement.json");
        log << "agreement report over " << sheets.size() << " sheets\n";
    }

    fs::path cache = cache_root(config);
    prep::SkinBlobFaceDetector detector;
    prep::BorderColorSegmenter segmenter;
    exp::SampleLoader loader = [&](const data::ImageSample& sample, const std::string& arch) {
        zoo::LabeledImage li;
        li.image = prep::preprocess_sample(sample, detector, segmenter, arch, cache);
        li.label = sample.pain_class;
        return li;
    };

    fs::path run_base = config.run_dir / "runs" / effective_run_id(config);
    for (auto scenario : config.scenarios) {
        const data::Corpus* ext =
            scenario == exp::Scenario::external_test ? &*external : nullptr;
        exp::SplitPlan plan = exp::make_splits(corpus, scenario, config.k, config.seed, ext);
        log << "scenario " << exp::to_string(scenario) << ": " << plan.folds.size()
            << " folds x " << config.architectures.size() << " architectures\n";
        auto reports = exp::run_scenario(plan, config.architectures, config.train, loader,
                                         run_base, config.jobs);
        out.reports.insert(out.reports.end(), reports.begin(), reports.end());
    }

    out.metrics_csv = reports_dir / "metrics.csv";
    report::write_metrics_csv(out.metrics_csv, out.reports);
    out.figures = report::render_figures(reports_dir / "figures", out.reports);

    emit_heatmaps(config, corpus, external ? &*external : nullptr, run_base, cache, out, log);
    log << "done: " << out.reports.size() << " evaluation reports, " << out.heatmaps.size()
        << " heatmaps\n";
    return out;
}

}  // namespace painbench::run
