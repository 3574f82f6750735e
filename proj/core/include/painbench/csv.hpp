#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace painbench::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;           // -1 if absent
    int require_column(const std::string& name) const;   // throws MissingField
};

// Reads a comma-separated file with a header row. Double-quoted fields
// may contain commas and doubled quotes.
Table read_file(const std::filesystem::path& path);
Table parse(const std::string& text);

std::string escape(const std::string& field);
void write_file(const std::filesystem::path& path, const Table& table);

}  // namespace painbench::csv
