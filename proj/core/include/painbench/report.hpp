#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "painbench/dataset.hpp"
#include "painbench/experiments.hpp"

namespace painbench::report {

// metrics.csv: one row per (scenario, architecture, fold) plus "mean"
// and "stddev" rows. Values are written with full precision so a
// read-back round-trips bit-exactly.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<experiments::EvaluationReport>& reports);

std::vector<experiments::EvaluationReport> read_metrics_csv(const std::filesystem::path& path);

// Grouped bar chart of one fold-averaged metric: x groups are
// architectures, one bar per scenario within a group.
enum class Metric { accuracy, macro_f1, precision_no_pain, recall_no_pain, precision_pain,
                    recall_pain };

void render_metric_chart(const std::filesystem::path& png_path,
                         const std::vector<experiments::EvaluationReport>& reports, Metric metric,
                         const std::string& title);

// Emits the full figure set under dir: accuracy.png and f1.png over
// all scenarios, plus per-class precision/recall charts restricted to
// the external_test scenario when present. Returns the paths written.
std::vector<std::filesystem::path> render_figures(
    const std::filesystem::path& dir, const std::vector<experiments::EvaluationReport>& reports);

// Per-dataset subject/image/class-balance table plus a total row.
void write_corpus_summary_csv(const std::filesystem::path& path,
                              const data::CorpusSummary& summary);

double metric_value(const experiments::FoldReport& fold, Metric metric);

}  // namespace painbench::report
