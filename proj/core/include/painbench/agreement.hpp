#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "painbench/scales.hpp"

namespace painbench::agreement {

struct RatingsTable {
    std::vector<std::vector<double>> matrix;  // n_subjects rows x n_raters cols
    std::string scale_name;
    std::vector<data::Stimulus> stimulus_labels;  // optional, per subject

    int n_subjects() const { return static_cast<int>(matrix.size()); }
    int n_raters() const { return matrix.empty() ? 0 : static_cast<int>(matrix[0].size()); }
};

enum class AgreementCategory { low, fair_good, excellent };

std::string to_string(AgreementCategory c);

struct AgreementResult {
    double icc = 0.0;
    AgreementCategory category = AgreementCategory::low;
    int n_subjects = 0;
    int n_raters = 0;
};

// ICC(2,1): two-way random effects, absolute agreement, single
// measures, from the two-way ANOVA mean squares:
//   (MS_R - MS_E) / (MS_R + (k-1) MS_E + (k/n)(MS_C - MS_E)).
// Throws DegenerateTable when all cells are identical, TooFewSubjects
// for n < 2 or k < 2.
double icc(const RatingsTable& table);

// Fleiss bands: low <= 0.40 < fair_good <= 0.75 < excellent.
AgreementCategory icc_category(double icc_value);

AgreementResult agreement_result(const RatingsTable& table);

struct ScaleAgreement {
    std::string scale;
    std::optional<AgreementResult> overall;
    std::map<data::Stimulus, AgreementResult> by_stimulus;
    int recordings_pain = 0;     // consensus-label counts per scale
    int recordings_no_pain = 0;
};

struct StratifiedAgreement {
    std::vector<ScaleAgreement> scales;
    std::vector<std::string> raters;
    std::vector<scales::ConsensusLabel> facs_consensus;  // FACS-based image labels
};

// One agreement cell per (scale, stimulus) plus per-scale overall and
// pain/no-pain recording counts. Every recording must be scored by
// the same rater set; throws InconsistentRaterSet otherwise.
StratifiedAgreement stratified_agreement(const std::vector<scales::RaterScoreSheet>& sheets);

// Agreement report as a CSV table plus a JSON blob of raw values.
void write_agreement_report(const StratifiedAgreement& result,
                            const std::filesystem::path& csv_path,
                            const std::filesystem::path& json_path);

}  // namespace painbench::agreement
