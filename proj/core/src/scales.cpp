#include "painbench/scales.hpp"

#include <algorithm>
#include <numeric>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"

namespace painbench::scales {

static void check_au(int v, const char* name) {
    if (v < 0 || v > 5)
        fail("OutOfRangeAU", std::string(name) + "=" + std::to_string(v) + " outside 0..5");
}

int facs_pain_score(const AUIntensities& au) {
    check_au(au.au4, "au4");
    check_au(au.au6, "au6");
    check_au(au.au7, "au7");
    check_au(au.au9, "au9");
    check_au(au.au10, "au10");
    check_au(au.au43, "au43");
    return au.au4 + std::max(au.au6, au.au7) + std::max(au.au9, au.au10) + au.au43;
}

int ncapc_total(const std::vector<int>& items) {
    if (items.size() != kNcapcItemCount)
        fail("WrongItemCount", std::to_string(items.size()) + " items, expected 18");
    for (int v : items)
        if (v < 0) fail("WrongItemCount", "negative item score");
    return std::accumulate(items.begin(), items.end(), 0);
}

ConsensusLabel binarize_consensus(const std::string& recording_id,
                                  const std::vector<std::pair<std::string, double>>& scores) {
    if (scores.size() < 2)
        fail("InsufficientRaters", "consensus needs at least two raters, got " +
                                       std::to_string(scores.size()));
    ConsensusLabel label;
    label.recording_id = recording_id;
    label.per_rater_scores = scores;
    bool all_zero = std::all_of(scores.begin(), scores.end(),
                                [](const auto& s) { return s.second == 0.0; });
    label.pain_class = all_zero ? data::PainClass::NO_PAIN : data::PainClass::PAIN;
    return label;
}

static const char* kAuColumns[] = {"au4", "au6", "au7", "au9", "au10", "au43"};

std::vector<RaterScoreSheet> load_scoresheets(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    int c_rater = table.require_column("rater_id");
    int c_rec = table.require_column("recording_id");
    int c_stim = table.column("stimulus");
    int c_wong = table.column("wong_baker");
    std::array<int, 6> c_au;
    bool have_au = true;
    for (int i = 0; i < 6; ++i) {
        c_au[i] = table.column(kAuColumns[i]);
        if (c_au[i] < 0) have_au = false;
    }
    std::array<int, kNcapcItemCount> c_ncapc;
    bool have_ncapc = true;
    for (int i = 0; i < kNcapcItemCount; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "ncapc_%02d", i + 1);
        c_ncapc[i] = table.column(name);
        if (c_ncapc[i] < 0) have_ncapc = false;
    }

    std::vector<RaterScoreSheet> sheets;
    for (const auto& row : table.rows) {
        RaterScoreSheet sheet;
        sheet.rater_id = row[c_rater];
        sheet.recording_id = row[c_rec];
        if (sheet.rater_id.empty() || sheet.recording_id.empty())
            fail("MissingField", "empty rater_id/recording_id in " + path.string());
        if (c_stim >= 0) sheet.stimulus = data::parse_stimulus(row[c_stim]);
        if (have_au && !row[c_au[0]].empty()) {
            AUIntensities au;
            int* slots[] = {&au.au4, &au.au6, &au.au7, &au.au9, &au.au10, &au.au43};
            for (int i = 0; i < 6; ++i) {
                if (row[c_au[i]].empty()) fail("MissingField", "partial AU row in " + path.string());
                *slots[i] = std::stoi(row[c_au[i]]);
                check_au(*slots[i], kAuColumns[i]);
            }
            sheet.facs = au;
        }
        if (c_wong >= 0 && !row[c_wong].empty()) {
            int w = std::stoi(row[c_wong]);
            if (w < 0 || w > 10 || w % 2 != 0)
                fail("MissingField", "wong_baker must be one of {0,2,4,6,8,10}, got " +
                                         std::to_string(w));
            sheet.wong_baker = w;
        }
        if (have_ncapc && !row[c_ncapc[0]].empty()) {
            std::vector<int> items(kNcapcItemCount);
            for (int i = 0; i < kNcapcItemCount; ++i) {
                if (row[c_ncapc[i]].empty())
                    fail("WrongItemCount", "partial NCAPC row in " + path.string());
                items[i] = std::stoi(row[c_ncapc[i]]);
            }
            sheet.ncapc_total = ncapc_total(items);
            sheet.ncapc_items = std::move(items);
        }
        sheets.push_back(std::move(sheet));
    }
    return sheets;
}

void write_scoresheets(const std::filesystem::path& path,
                       const std::vector<RaterScoreSheet>& sheets) {
    csv::Table table;
    table.header = {"rater_id", "recording_id", "stimulus"};
    for (const char* c : kAuColumns) table.header.push_back(c);
    table.header.push_back("wong_baker");
    for (int i = 0; i < kNcapcItemCount; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "ncapc_%02d", i + 1);
        table.header.push_back(name);
    }
    for (const auto& sheet : sheets) {
        std::vector<std::string> row = {sheet.rater_id, sheet.recording_id,
                                        data::to_string(sheet.stimulus)};
        if (sheet.facs) {
            const auto& au = *sheet.facs;
            for (int v : {au.au4, au.au6, au.au7, au.au9, au.au10, au.au43})
                row.push_back(std::to_string(v));
        } else {
            row.insert(row.end(), 6, "");
        }
        row.push_back(sheet.wong_baker ? std::to_string(*sheet.wong_baker) : "");
        if (sheet.ncapc_items) {
            for (int v : *sheet.ncapc_items) row.push_back(std::to_string(v));
        } else {
            row.insert(row.end(), kNcapcItemCount, "");
        }
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

}  // namespace painbench::scales
