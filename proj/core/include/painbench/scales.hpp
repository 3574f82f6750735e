#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "painbench/dataset.hpp"

namespace painbench::scales {

// Six pain-related action units, each rated 0 (no expression) to
// 5 (extreme expression).
struct AUIntensities {
    int au4 = 0, au6 = 0, au7 = 0, au9 = 0, au10 = 0, au43 = 0;
};

inline constexpr int kNcapcItemCount = 18;

struct RaterScoreSheet {
    std::string rater_id;
    std::string recording_id;
    data::Stimulus stimulus = data::Stimulus::other;
    std::optional<AUIntensities> facs;
    std::optional<int> wong_baker;  // one of {0,2,4,6,8,10}
    std::optional<std::vector<int>> ncapc_items;
    std::optional<int> ncapc_total;
};

struct ConsensusLabel {
    std::string recording_id;
    data::PainClass pain_class = data::PainClass::PAIN;
    std::vector<std::pair<std::string, double>> per_rater_scores;
};

// AU4 + max(AU6,AU7) + max(AU9,AU10) + AU43, a 0..20 composite.
// Throws OutOfRangeAU.
int facs_pain_score(const AUIntensities& au);

// Sum of exactly 18 non-negative item scores. Throws WrongItemCount.
int ncapc_total(const std::vector<int>& items);

// NO_PAIN only on a unanimous zero; anything else is PAIN.
// Throws InsufficientRaters for fewer than two raters.
ConsensusLabel binarize_consensus(const std::string& recording_id,
                                  const std::vector<std::pair<std::string, double>>& scores);

// Scoresheet CSV columns: rater_id, recording_id, stimulus,
// au4,au6,au7,au9,au10,au43, wong_baker, ncapc_01..ncapc_18.
// One row per (rater, recording); empty cells mean "scale absent".
std::vector<RaterScoreSheet> load_scoresheets(const std::filesystem::path& path);

void write_scoresheets(const std::filesystem::path& path,
                       const std::vector<RaterScoreSheet>& sheets);

}  // namespace painbench::scales
