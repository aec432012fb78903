#pragma once

#include <string>
#include <vector>

namespace formline::csv {

// Minimal RFC-4180-ish reader: comma separated, optional double-quote quoting,
// tolerates \r\n line endings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // -1 if the column is missing.
    int column(const std::string& name) const;
};

Table read(const std::string& text);
Table read_file(const std::string& path);

std::string escape(const std::string& field);
std::string join_row(const std::vector<std::string>& fields);

// Writes via temp file + rename so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace formline::csv
