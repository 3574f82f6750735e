#include "painbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"

namespace painbench::report {

namespace fs = std::filesystem;
namespace exp = painbench::experiments;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> fold_row(const std::string& scenario, const std::string& arch,
                                  const std::string& fold, const exp::FoldReport& r) {
    return {scenario,
            arch,
            fold,
            fmt(r.accuracy),
            fmt(r.macro_f1),
            fmt(r.no_pain.precision),
            fmt(r.no_pain.recall),
            fmt(r.no_pain.f1),
            std::to_string(r.no_pain.support),
            fmt(r.pain.precision),
            fmt(r.pain.recall),
            fmt(r.pain.f1),
            std::to_string(r.pain.support),
            fmt(r.confusion[0][0]),
            fmt(r.confusion[0][1]),
            fmt(r.confusion[1][0]),
            fmt(r.confusion[1][1])};
}

exp::FoldReport parse_fold_row(const std::vector<std::string>& row) {
    exp::FoldReport r;
    r.accuracy = std::stod(row[3]);
    r.macro_f1 = std::stod(row[4]);
    r.no_pain.precision = std::stod(row[5]);
    r.no_pain.recall = std::stod(row[6]);
    r.no_pain.f1 = std::stod(row[7]);
    r.no_pain.support = std::stoi(row[8]);
    r.pain.precision = std::stod(row[9]);
    r.pain.recall = std::stod(row[10]);
    r.pain.f1 = std::stod(row[11]);
    r.pain.support = std::stoi(row[12]);
    r.confusion[0][0] = std::stod(row[13]);
    r.confusion[0][1] = std::stod(row[14]);
    r.confusion[1][0] = std::stod(row[15]);
    r.confusion[1][1] = std::stod(row[16]);
    return r;
}

const std::vector<std::string> kMetricsHeader = {
    "scenario",          "architecture",   "fold",       "accuracy",
    "macro_f1",          "precision_no_pain", "recall_no_pain", "f1_no_pain",
    "support_no_pain",   "precision_pain", "recall_pain", "f1_pain",
    "support_pain",      "tn",             "fp",         "fn",
    "tp"};

}  // namespace

void write_metrics_csv(const fs::path& path, const std::vector<exp::EvaluationReport>& reports) {
    if (reports.empty()) fail("EmptyTestSet", "no evaluation reports to write");
    csv::Table table;
    table.header = kMetricsHeader;
    for (const auto& rep : reports) {
        for (size_t i = 0; i < rep.per_fold.size(); ++i)
            table.rows.push_back(fold_row(rep.scenario, rep.architecture, std::to_string(i),
                                          rep.per_fold[i]));
        table.rows.push_back(fold_row(rep.scenario, rep.architecture, "mean", rep.averaged));
        table.rows.push_back(fold_row(rep.scenario, rep.architecture, "stddev", rep.stddev));
    }
    csv::write_file(path, table);
}

std::vector<exp::EvaluationReport> read_metrics_csv(const fs::path& path) {
    csv::Table table = csv::read_file(path);
    for (const auto& col : kMetricsHeader) table.require_column(col);
    std::vector<exp::EvaluationReport> out;
    auto find = [&](const std::string& scenario,
                    const std::string& arch) -> exp::EvaluationReport& {
        for (auto& r : out)
            if (r.scenario == scenario && r.architecture == arch) return r;
        out.emplace_back();
        out.back().scenario = scenario;
        out.back().architecture = arch;
        return out.back();
    };
    for (const auto& row : table.rows) {
        auto& rep = find(row[0], row[1]);
        exp::FoldReport fold = parse_fold_row(row);
        if (row[2] == "mean")
            rep.averaged = fold;
        else if (row[2] == "stddev")
            rep.stddev = fold;
        else
            rep.per_fold.push_back(fold);
    }
    return out;
}

double metric_value(const exp::FoldReport& fold, Metric metric) {
    switch (metric) {
        case Metric::accuracy: return fold.accuracy;
        case Metric::macro_f1: return fold.macro_f1;
        case Metric::precision_no_pain: return fold.no_pain.precision;
        case Metric::recall_no_pain: return fold.no_pain.recall;
        case Metric::precision_pain: return fold.pain.precision;
        case Metric::recall_pain: return fold.pain.recall;
    }
    return 0.0;
}

void render_metric_chart(const fs::path& png_path,
                         const std::vector<exp::EvaluationReport>& reports, Metric metric,
                         const std::string& title) {
    if (reports.empty()) fail("EmptyTestSet", "no evaluation reports to chart");

    std::vector<std::string> archs, scenarios;
    for (const auto& r : reports) {
        if (std::find(archs.begin(), archs.end(), r.architecture) == archs.end())
            archs.push_back(r.architecture);
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
    }

    const int bar_w = 26, gap = 10, group_gap = 34;
    const int margin_l = 70, margin_r = 30, margin_t = 60, margin_b = 110;
    const int plot_h = 320;
    int group_w = static_cast<int>(scenarios.size()) * (bar_w + gap) - gap + group_gap;
    int width = margin_l + margin_r + static_cast<int>(archs.size()) * group_w;
    int height = margin_t + plot_h + margin_b;
    cv::Mat canvas(height, std::max(width, 320), CV_8UC3, cv::Scalar(255, 255, 255));

    const cv::Scalar palette[] = {cv::Scalar(180, 119, 31), cv::Scalar(14, 127, 255),
                                  cv::Scalar(44, 160, 44), cv::Scalar(40, 39, 214)};
    auto y_of = [&](double v) {
        return margin_t + plot_h - static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * plot_h));
    };

    for (int tick = 0; tick <= 10; tick += 2) {
        double v = tick / 10.0;
        int y = y_of(v);
        cv::line(canvas, {margin_l, y}, {canvas.cols - margin_r, y}, cv::Scalar(230, 230, 230));
        cv::putText(canvas, fmt(v).substr(0, 3), {10, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                    cv::Scalar(60, 60, 60));
    }

    for (size_t a = 0; a < archs.size(); ++a) {
        int x0 = margin_l + static_cast<int>(a) * group_w;
        for (size_t s = 0; s < scenarios.size(); ++s) {
            const exp::EvaluationReport* rep = nullptr;
            for (const auto& r : reports)
                if (r.architecture == archs[a] && r.scenario == scenarios[s]) rep = &r;
            if (!rep) continue;
            double v = metric_value(rep->averaged, metric);
            int x = x0 + static_cast<int>(s) * (bar_w + gap);
            cv::rectangle(canvas, cv::Point(x, y_of(v)), cv::Point(x + bar_w, y_of(0.0)),
                          palette[s % 4], cv::FILLED);
        }
        cv::putText(canvas, archs[a],
                    {x0, margin_t + plot_h + 28 + static_cast<int>(a % 2) * 18},
                    cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(0, 0, 0));
    }

    cv::line(canvas, {margin_l, margin_t}, {margin_l, y_of(0.0)}, cv::Scalar(0, 0, 0));
    cv::line(canvas, {margin_l, y_of(0.0)}, {canvas.cols - margin_r, y_of(0.0)},
             cv::Scalar(0, 0, 0));
    cv::putText(canvas, title, {margin_l, 32}, cv::FONT_HERSHEY_SIMPLEX, 0.7, cv::Scalar(0, 0, 0),
                1);
    int ly = margin_t + plot_h + 62;
    int lx = margin_l;
    for (size_t s = 0; s < scenarios.size(); ++s) {
        cv::rectangle(canvas, cv::Point(lx, ly - 10), cv::Point(lx + 14, ly + 2), palette[s % 4],
                      cv::FILLED);
        cv::putText(canvas, scenarios[s], {lx + 20, ly}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                    cv::Scalar(0, 0, 0));
        lx += 20 + 12 * static_cast<int>(scenarios[s].size()) + 24;
    }

    fs::create_directories(png_path.parent_path());
    if (!cv::imwrite(png_path.string(), canvas))
        fail("MissingImageFile", "could not write " + png_path.string());
}

std::vector<fs::path> render_figures(const fs::path& dir,
                                     const std::vector<exp::EvaluationReport>& reports) {
    if (reports.empty()) fail("EmptyTestSet", "no evaluation reports to render");
    fs::create_directories(dir);
    std::vector<fs::path> written;

    auto emit = [&](const fs::path& name, const std::vector<exp::EvaluationReport>& reps,
                    Metric metric, const std::string& title) {
        fs::path p = dir / name;
        render_metric_chart(p, reps, metric, title);
        written.push_back(p);
    };

    emit("accuracy.png", reports, Metric::accuracy, "Accuracy by network and scenario");
    emit("f1.png", reports, Metric::macro_f1, "Macro F1 by network and scenario");

    std::vector<exp::EvaluationReport> external;
    for (const auto& r : reports)
        if (r.scenario == exp::to_string(exp::Scenario::external_test)) external.push_back(r);
    if (!external.empty()) {
        emit("external_precision_no_pain.png", external, Metric::precision_no_pain,
             "External test precision, no-pain class");
        emit("external_precision_pain.png", external, Metric::precision_pain,
             "External test precision, pain class");
        emit("external_recall_no_pain.png", external, Metric::recall_no_pain,
             "External test recall, no-pain class");
        emit("external_recall_pain.png", external, Metric::recall_pain,
             "External test recall, pain class");
    }
    return written;
}

void write_corpus_summary_csv(const fs::path& path, const data::CorpusSummary& summary) {
    csv::Table table;
    table.header = {"dataset", "subjects", "images", "pain", "no_pain"};
    auto push = [&](const data::DatasetSummaryRow& r) {
        table.rows.push_back({r.dataset, std::to_string(r.subjects), std::to_string(r.images),
                              std::to_string(r.pain), std::to_string(r.no_pain)});
    };
    for (const auto& row : summary.per_dataset) push(row);
    push(summary.total);
    csv::write_file(path, table);
}

}  // namespace painbench::report
