#include "painbench/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"

namespace painbench::agreement {

std::string to_string(AgreementCategory c) {
    switch (c) {
        case AgreementCategory::low: return "low";
        case AgreementCategory::fair_good: return "fair_good";
        case AgreementCategory::excellent: return "excellent";
    }
    return "?";
}

double icc(const RatingsTable& table) {
    const int n = table.n_subjects();
    const int k = table.n_raters();
    if (n < 2) fail("TooFewSubjects", "ICC needs at least 2 subjects, got " + std::to_string(n));
    if (k < 2) fail("TooFewSubjects", "ICC needs at least 2 raters, got " + std::to_string(k));
    for (const auto& row : table.matrix)
        if (static_cast<int>(row.size()) != k)
            fail("TooFewSubjects", "ragged ratings table");

    double grand = 0;
    for (const auto& row : table.matrix)
        for (double v : row) grand += v;
    grand /= n * k;

    std::vector<double> row_mean(n, 0), col_mean(k, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            row_mean[i] += table.matrix[i][j];
            col_mean[j] += table.matrix[i][j];
        }
        row_mean[i] /= k;
    }
    for (int j = 0; j < k; ++j) col_mean[j] /= n;

    double ss_total = 0, ss_rows = 0, ss_cols = 0;
    for (int i = 0; i < n; ++i) {
        ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
        for (int j = 0; j < k; ++j) {
            double d = table.matrix[i][j] - grand;
            ss_total += d * d;
        }
    }
    ss_rows *= k;
    for (int j = 0; j < k; ++j) ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
    ss_cols *= n;
    double ss_err = ss_total - ss_rows - ss_cols;

    if (ss_total <= 0)
        fail("DegenerateTable", "all ratings identical; ICC is 0/0");

    double ms_rows = ss_rows / (n - 1);
    double ms_cols = ss_cols / (k - 1);
    double ms_err = ss_err / (static_cast<double>(n - 1) * (k - 1));

    double denom = ms_rows + (k - 1) * ms_err + (static_cast<double>(k) / n) * (ms_cols - ms_err);
    if (std::abs(denom) < 1e-300)
        fail("DegenerateTable", "zero ICC denominator");
    return (ms_rows - ms_err) / denom;
}

AgreementCategory icc_category(double icc_value) {
    if (icc_value <= 0.40) return AgreementCategory::low;
    if (icc_value <= 0.75) return AgreementCategory::fair_good;
    return AgreementCategory::excellent;
}

AgreementResult agreement_result(const RatingsTable& table) {
    AgreementResult r;
    r.icc = icc(table);
    r.category = icc_category(r.icc);
    r.n_subjects = table.n_subjects();
    r.n_raters = table.n_raters();
    return r;
}

namespace {

struct Recording {
    std::string id;
    data::Stimulus stimulus = data::Stimulus::other;
    // rater -> sheet
    std::map<std::string, const scales::RaterScoreSheet*> by_rater;
};

std::optional<double> scale_score(const scales::RaterScoreSheet& sheet, const std::string& scale) {
    if (scale == "facs") {
        if (!sheet.facs) return std::nullopt;
        return static_cast<double>(scales::facs_pain_score(*sheet.facs));
    }
    if (scale == "wong_baker") {
        if (!sheet.wong_baker) return std::nullopt;
        return static_cast<double>(*sheet.wong_baker);
    }
    if (scale == "ncapc") {
        if (!sheet.ncapc_total) return std::nullopt;
        return static_cast<double>(*sheet.ncapc_total);
    }
    return std::nullopt;
}

}  // namespace

StratifiedAgreement stratified_agreement(const std::vector<scales::RaterScoreSheet>& sheets) {
    if (sheets.empty()) fail("InsufficientRaters", "no scoresheets");

    std::set<std::string> rater_set;
    for (const auto& s : sheets) rater_set.insert(s.rater_id);
    std::vector<std::string> raters(rater_set.begin(), rater_set.end());
    if (raters.size() < 2)
        fail("InsufficientRaters", "agreement needs at least two raters");

    std::map<std::string, Recording> recordings;
    for (const auto& s : sheets) {
        auto& rec = recordings[s.recording_id];
        if (rec.id.empty()) {
            rec.id = s.recording_id;
            rec.stimulus = s.stimulus;
        }
        if (!rec.by_rater.emplace(s.rater_id, &s).second)
            fail("InconsistentRaterSet",
                 "rater " + s.rater_id + " scored recording " + s.recording_id + " twice");
    }
    for (const auto& [id, rec] : recordings) {
        if (rec.by_rater.size() != raters.size())
            fail("InconsistentRaterSet",
                 "recording " + id + " scored by " + std::to_string(rec.by_rater.size()) +
                     " of " + std::to_string(raters.size()) + " raters");
    }

    StratifiedAgreement out;
    out.raters = raters;

    for (const std::string scale : {"wong_baker", "facs", "ncapc"}) {
        ScaleAgreement sa;
        sa.scale = scale;
        RatingsTable overall;
        overall.scale_name = scale;
        std::map<data::Stimulus, RatingsTable> by_stim;
        for (const auto& [id, rec] : recordings) {
            std::vector<double> row;
            int present = 0;
            for (const auto& rater : raters) {
                auto v = scale_score(*rec.by_rater.at(rater), scale);
                if (v) {
                    row.push_back(*v);
                    ++present;
                }
            }
            if (present == 0) continue;
            if (present != static_cast<int>(raters.size()))
                fail("InconsistentRaterSet",
                     "recording " + id + " scored on " + scale + " by a partial rater set");
            overall.matrix.push_back(row);
            overall.stimulus_labels.push_back(rec.stimulus);
            auto& st = by_stim[rec.stimulus];
            st.scale_name = scale;
            st.matrix.push_back(row);

            std::vector<std::pair<std::string, double>> pairs;
            for (size_t j = 0; j < raters.size(); ++j) pairs.emplace_back(raters[j], row[j]);
            auto label = scales::binarize_consensus(id, pairs);
            (label.pain_class == data::PainClass::PAIN ? sa.recordings_pain
                                                       : sa.recordings_no_pain)++;
            if (scale == "facs") out.facs_consensus.push_back(std::move(label));
        }
        if (overall.n_subjects() >= 2) {
            try {
                sa.overall = agreement_result(overall);
            } catch (const PipelineError& e) {
                if (e.code() != "DegenerateTable") throw;
            }
        }
        for (auto& [stim, table] : by_stim) {
            if (table.n_subjects() < 2) continue;
            try {
                sa.by_stimulus[stim] = agreement_result(table);
            } catch (const PipelineError& e) {
                if (e.code() != "DegenerateTable") throw;
            }
        }
        if (!overall.matrix.empty()) out.scales.push_back(std::move(sa));
    }
    return out;
}

void write_agreement_report(const StratifiedAgreement& result,
                            const std::filesystem::path& csv_path,
                            const std::filesystem::path& json_path) {
    csv::Table table;
    table.header = {"source_of_pain"};
    for (const auto& sa : result.scales) table.header.push_back(sa.scale);

    auto icc_cell = [](const std::optional<AgreementResult>& r) {
        if (!r) return std::string("");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", r->icc);
        return std::string(buf);
    };
    for (data::Stimulus stim : {data::Stimulus::injection, data::Stimulus::stretching,
                                data::Stimulus::other}) {
        std::vector<std::string> row = {data::to_string(stim)};
        for (const auto& sa : result.scales) {
            auto it = sa.by_stimulus.find(stim);
            row.push_back(icc_cell(it == sa.by_stimulus.end()
                                       ? std::nullopt
                                       : std::optional<AgreementResult>(it->second)));
        }
        table.rows.push_back(row);
    }
    std::vector<std::string> overall_row = {"overall"};
    std::vector<std::string> no_pain_row = {"videos_rated_no_pain"};
    std::vector<std::string> pain_row = {"videos_rated_pain"};
    for (const auto& sa : result.scales) {
        overall_row.push_back(icc_cell(sa.overall));
        no_pain_row.push_back(std::to_string(sa.recordings_no_pain));
        pain_row.push_back(std::to_string(sa.recordings_pain));
    }
    table.rows.push_back(overall_row);
    table.rows.push_back(no_pain_row);
    table.rows.push_back(pain_row);
    csv::write_file(csv_path, table);

    nlohmann::json j;
    j["raters"] = result.raters;
    for (const auto& sa : result.scales) {
        nlohmann::json js;
        js["recordings_pain"] = sa.recordings_pain;
        js["recordings_no_pain"] = sa.recordings_no_pain;
        if (sa.overall) {
            js["overall"] = {{"icc", sa.overall->icc},
                             {"category", to_string(sa.overall->category)},
                             {"n_subjects", sa.overall->n_subjects},
                             {"n_raters", sa.overall->n_raters}};
        }
        for (const auto& [stim, r] : sa.by_stimulus) {
            js["by_stimulus"][data::to_string(stim)] = {
                {"icc", r.icc}, {"category", to_string(r.category)},
                {"n_subjects", r.n_subjects}, {"n_raters", r.n_raters}};
        }
        j["scales"][sa.scale] = js;
    }
    std::ofstream os(json_path);
    os << j.dump(2) << '\n';
}

}  // namespace painbench::agreement
