#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "painbench/agreement.hpp"
#include "painbench/error.hpp"
#include "painbench/explain.hpp"
#include "painbench/fixtures.hpp"
#include "painbench/hash.hpp"
#include "painbench/report.hpp"
#include "painbench/runner.hpp"

namespace fs = std::filesystem;
using namespace painbench;

namespace {

void print_summary(const data::CorpusSummary& summary) {
    std::printf("%-12s %9s %8s %7s %9s\n", "dataset", "subjects", "images", "pain", "no_pain");
    auto row = [](const data::DatasetSummaryRow& r) {
        std::printf("%-12s %9d %8d %7d %9d\n", r.dataset.c_str(), r.subjects, r.images, r.pain,
                    r.no_pain);
    };
    for (const auto& r : summary.per_dataset) row(r);
    row(summary.total);
}

int cmd_fixtures(const fs::path& out, int subjects, int frames, int side, uint64_t seed,
                 bool table2, int recordings, int external_subjects, int external_images) {
    fixtures::GeneratedCorpus gen;
    if (table2) {
        std::vector<fixtures::DatasetBudget> budgets = {
            {data::DatasetTag::mint, 20, 800, true, 3},
            {data::DatasetTag::delaware, 240, 803, false, 2},
            {data::DatasetTag::unbc, 25, 980, true, 17},
        };
        gen = fixtures::generate_multi(budgets, side, seed, out);
    } else {
        fixtures::SyntheticFaceParams params;
        params.seed = seed;
        params.n_subjects = subjects;
        params.frames_per_subject_per_class = frames;
        params.image_side = side;
        gen = fixtures::generate_corpus(params, out);
    }
    std::printf("wrote %s (%zu samples)\n", gen.manifest_path.string().c_str(),
                gen.corpus.samples.size());

    if (external_subjects > 0) {
        fixtures::SyntheticFaceParams params;
        params.seed = seed + 1;
        params.n_subjects = external_subjects;
        params.frames_per_subject_per_class =
            std::max(1, external_images / (2 * external_subjects));
        params.image_side = side;
        params.tag = data::DatasetTag::cppain;
        params.name = "cppain";
        auto ext = fixtures::generate_corpus(params, out / "external");
        std::printf("wrote %s (%zu samples)\n", ext.manifest_path.string().c_str(),
                    ext.corpus.samples.size());
    }
    if (recordings > 0) {
        auto sheets = fixtures::generate_scoresheets(recordings, seed + 2);
        fs::path path = out / "scoresheets.csv";
        scales::write_scoresheets(path, sheets);
        std::printf("wrote %s (%zu rows)\n", path.string().c_str(), sheets.size());
    }
    print_summary(data::corpus_summary(gen.corpus));
    return 0;
}

int cmd_agree(const fs::path& sheets_path, const fs::path& out_dir) {
    auto sheets = scales::load_scoresheets(sheets_path);
    auto result = agreement::stratified_agreement(sheets);
    fs::create_directories(out_dir);
    agreement::write_agreement_report(result, out_dir / "agreement.csv",
                                      out_dir / "agreement.json");
    for (const auto& scale : result.scales) {
        if (scale.overall)
            std::printf("%-12s ICC %.3f (%s)  pain %d  no_pain %d\n", scale.scale.c_str(),
                        scale.overall->icc, to_string(scale.overall->category).c_str(),
                        scale.recordings_pain, scale.recordings_no_pain);
        else
            std::printf("%-12s ICC degenerate\n", scale.scale.c_str());
    }
    std::printf("wrote %s\n", (out_dir / "agreement.csv").string().c_str());
    return 0;
}

int cmd_explain(const fs::path& fold_dir, const std::string& arch, const fs::path& manifest,
                const fs::path& out_dir, const run::RunConfig& cfg) {
    zoo::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed + 1;
    zoo::TrainedModelRecord record = zoo::load_record(fold_dir, arch, tc);
    data::Corpus corpus = run::ingest(manifest, cfg.frame_budget);

    prep::SkinBlobFaceDetector detector;
    prep::BorderColorSegmenter segmenter;
    fs::path cache = run::cache_root(cfg);

    std::map<std::pair<data::PainClass, std::string>, std::vector<data::ImageSample>> pools;
    for (const auto& s : corpus.samples) {
        auto& pool = pools[{s.pain_class, data::to_string(s.subject.dataset_tag)}];
        if (static_cast<int>(pool.size()) < cfg.explain_samples_per_cell) pool.push_back(s);
    }

    std::vector<explain::GlobalHeatmap> heatmaps;
    for (const auto& [key, samples] : pools) {
        std::vector<explain::LocalExplanation> explanations;
        std::vector<prep::FaceLandmarks> landmarks;
        for (const auto& sample : samples) {
            try {
                auto img = prep::preprocess_sample(sample, detector, segmenter, arch, cache);
                landmarks.push_back(prep::detect_landmarks(img.pixels));
                explain::LimeParams params = cfg.lime;
                params.seed = fnv1a(sample.id() + "|" + arch, cfg.lime.seed);
                explanations.push_back(explain::lime_explain(record, img, key.first, params));
            } catch (const PipelineError& e) {
                std::fprintf(stderr, "skip %s: %s\n", sample.id().c_str(), e.what());
            }
        }
        if (explanations.empty()) continue;
        auto hm = explain::aggregate_heatmap(explanations, landmarks, arch, key.first, key.second);
        fs::path cell = out_dir / arch / data::to_string(key.first) / key.second;
        fs::create_directories(cell);
        explain::write_heatmap_grid(hm, cell / "heatmap.csv");
        explain::render_heatmaps({hm}, cell / "heatmap.png");
        heatmaps.push_back(std::move(hm));
    }
    if (heatmaps.empty()) fail("EmptyExplanationSet", "no explainable samples found");
    explain::render_heatmaps(heatmaps, out_dir / "heatmaps.png");
    std::printf("wrote %zu heatmaps under %s\n", heatmaps.size(), out_dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"painbench: manifest-driven pain classification experiment pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from an INI/TOML config file");

    run::RunConfig cfg;
    std::string scenario_csv;
    app.add_option("--run-dir", cfg.run_dir, "Run output directory");
    app.add_option("--arch", cfg.architectures, "Architecture name (repeatable)");
    app.add_option("--scenario", scenario_csv,
                   "Scenario: image_centric_cv, subject_centric_cv, external_test "
                   "(comma-separated for several)");
    app.add_option("--seed", cfg.seed, "Global random seed");
    app.add_option("--jobs", cfg.jobs, "Parallel training jobs");
    app.add_option("--manifest", cfg.manifest, "Corpus manifest CSV");
    app.add_option("--external-manifest", cfg.external_manifest, "External test manifest CSV");
    app.add_option("--scoresheets", cfg.scoresheets, "Rater scoresheet CSV");
    app.add_option("--run-id", cfg.run_id, "Run token (default: derived from the config)");
    app.add_option("--k", cfg.k, "Cross-validation folds");
    app.add_option("--epochs", cfg.train.epochs, "Training epochs");
    app.add_option("--batch-size", cfg.train.batch_size, "Mini-batch size");
    app.add_option("--learning-rate", cfg.train.learning_rate, "Adam learning rate");
    app.add_option("--frame-budget", cfg.frame_budget, "Frames kept per (subject, class)");
    app.add_option("--cache-dir", cfg.cache_dir,
                   "Preprocessing cache (PAINBENCH_CACHE overrides)");
    app.add_option("--lime-segments", cfg.lime.n_segments, "LIME segment count");
    app.add_option("--lime-perturbations", cfg.lime.n_perturbations, "LIME perturbation count");
    app.add_option("--explain-samples", cfg.explain_samples_per_cell,
                   "Samples per (model, class, dataset) heatmap cell");

    auto* c_ingest = app.add_subcommand("ingest", "Load a manifest and print a corpus summary");
    auto* c_preproc = app.add_subcommand("preprocess", "Warm the preprocessing cache");
    auto* c_agree = app.add_subcommand("agree", "Inter-rater agreement report from scoresheets");
    auto* c_run = app.add_subcommand("run", "Full pipeline: train, evaluate, report, explain");
    auto* c_explain = app.add_subcommand("explain", "Heatmaps for an already-trained fold");
    auto* c_report = app.add_subcommand("report", "Re-render figures from a metrics.csv");
    auto* c_fixtures = app.add_subcommand("fixtures", "Generate a synthetic face corpus");

    bool plan_only = false;
    c_run->add_flag("--plan-only", plan_only, "Write the job plan and exit before training");

    fs::path fold_dir, explain_out = "explain";
    c_explain->add_option("--fold-dir", fold_dir, "Directory with weights.pbnet + log.csv")
        ->required();
    c_explain->add_option("--out", explain_out, "Output directory");

    fs::path metrics_path;
    c_report->add_option("--metrics", metrics_path, "metrics.csv path (default under --run-dir)");

    fs::path fix_out = "fixtures";
    int fix_subjects = 10, fix_frames = 20, fix_side = 96, fix_recordings = 0;
    int fix_ext_subjects = 0, fix_ext_images = 0;
    bool fix_table2 = false;
    c_fixtures->add_option("--out", fix_out, "Output directory");
    c_fixtures->add_option("--subjects", fix_subjects, "Subject count");
    c_fixtures->add_option("--frames", fix_frames, "Frames per (subject, class)");
    c_fixtures->add_option("--side", fix_side, "Image side in pixels");
    c_fixtures->add_flag("--table2", fix_table2,
                         "Three-dataset replica budgets (285 subjects, 2583 images)");
    c_fixtures->add_option("--recordings", fix_recordings,
                           "Also emit a two-rater scoresheet fixture with this many recordings");
    c_fixtures->add_option("--external-subjects", fix_ext_subjects,
                           "Also emit an external test corpus with this many subjects");
    c_fixtures->add_option("--external-images", fix_ext_images, "External corpus image budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!scenario_csv.empty()) {
            cfg.scenarios.clear();
            size_t pos = 0;
            while (pos <= scenario_csv.size()) {
                size_t comma = scenario_csv.find(',', pos);
                if (comma == std::string::npos) comma = scenario_csv.size();
                cfg.scenarios.push_back(
                    experiments::parse_scenario(scenario_csv.substr(pos, comma - pos)));
                pos = comma + 1;
            }
        }

        if (c_fixtures->parsed())
            return cmd_fixtures(fix_out, fix_subjects, fix_frames, fix_side, cfg.seed, fix_table2,
                                fix_recordings, fix_ext_subjects, fix_ext_images);

        if (c_ingest->parsed()) {
            if (cfg.manifest.empty()) fail("MissingField", "ingest needs --manifest");
            print_summary(data::corpus_summary(run::ingest(cfg.manifest, cfg.frame_budget)));
            return 0;
        }

        if (c_preproc->parsed()) {
            if (cfg.manifest.empty()) fail("MissingField", "preprocess needs --manifest");
            if (cfg.architectures.empty()) fail("MissingField", "preprocess needs --arch");
            data::Corpus corpus = run::ingest(cfg.manifest, cfg.frame_budget);
            prep::SkinBlobFaceDetector detector;
            prep::BorderColorSegmenter segmenter;
            fs::path cache = run::cache_root(cfg);
            size_t done = 0;
            for (const auto& arch : cfg.architectures)
                for (const auto& sample : corpus.samples) {
                    prep::preprocess_sample(sample, detector, segmenter, arch, cache);
                    ++done;
                }
            std::printf("preprocessed %zu images into %s\n", done, cache.string().c_str());
            return 0;
        }

        if (c_agree->parsed()) {
            if (cfg.scoresheets.empty()) fail("MissingField", "agree needs --scoresheets");
            return cmd_agree(cfg.scoresheets, cfg.run_dir / "reports");
        }

        if (c_explain->parsed()) {
            if (cfg.architectures.size() != 1)
                fail("UnknownArchitecture", "explain needs exactly one --arch");
            if (cfg.manifest.empty()) fail("MissingField", "explain needs --manifest");
            return cmd_explain(fold_dir, cfg.architectures[0], cfg.manifest, explain_out, cfg);
        }

        if (c_report->parsed()) {
            if (metrics_path.empty()) metrics_path = cfg.run_dir / "reports" / "metrics.csv";
            auto reports = report::read_metrics_csv(metrics_path);
            auto figs = report::render_figures(metrics_path.parent_path() / "figures", reports);
            std::printf("rendered %zu figures\n", figs.size());
            return 0;
        }

        if (c_run->parsed()) {
            if (plan_only) {
                fs::create_directories(cfg.run_dir / "reports");
                fs::path plan = cfg.run_dir / "reports" / "plan.csv";
                run::write_plan_csv(cfg, plan);
                std::printf("planned %zu trainings -> %s\n", run::plan_jobs(cfg).size(),
                            plan.string().c_str());
                return 0;
            }
            run::RunOutputs out = run::run_all(cfg, std::cout);
            std::printf("metrics: %s\n", out.metrics_csv.string().c_str());
            return 0;
        }
    } catch (const PipelineError& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
