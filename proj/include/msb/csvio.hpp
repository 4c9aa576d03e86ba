#pragma once

#include <string>
#include <vector>

#include "msb/common.hpp"

namespace msb::csvio {

// Reads an entire file into memory. Throws IoError if unreadable.
std::string read_file(const std::string& path);

void write_file(const std::string& path, const std::string& content);

// Parses comma-separated numeric rows. Every row must have `n_columns`
// entries; ragged or non-numeric input throws FormatError. Rows are appended
// column-major into `columns` (one vector per column).
void parse_numeric_rows(const std::string& text, std::size_t n_columns,
                        std::vector<std::vector<double>>& columns,
                        std::size_t skip_rows = 0);

// Splits one line on commas, trimming surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

// Lossless formatting for round-trippable caches (shortest exact form).
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::string& path);             // first row = header
void write_table(const std::string& path, const Table& t);

}  // namespace msb::csvio
