#include "msb/csvio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace msb::csvio {

std::string read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::string out;
    if (size > 0) {
        out.resize(static_cast<std::size_t>(size));
        const std::size_t got = std::fread(out.data(), 1, out.size(), f);
        out.resize(got);
    }
    std::fclose(f);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot write '" + path + "': " + std::strerror(errno));
    const std::size_t put = std::fwrite(content.data(), 1, content.size(), f);
    std::fclose(f);
    if (put != content.size()) throw IoError("short write to '" + path + "'");
}

void parse_numeric_rows(const std::string& text, std::size_t n_columns,
                        std::vector<std::vector<double>>& columns, std::size_t skip_rows) {
    columns.assign(n_columns, {});
    const char* p = text.c_str();
    const char* end = p + text.size();
    std::size_t row = 0;
    while (p < end) {
        // Locate end of line.
        const char* eol = static_cast<const char*>(std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
        const char* line_end = eol ? eol : end;
        // Skip blank lines (common as trailing newline).
        const char* q = p;
        while (q < line_end && (*q == ' ' || *q == '\t' || *q == '\r')) ++q;
        if (q == line_end) {
            p = eol ? eol + 1 : end;
            continue;
        }
        if (row >= skip_rows) {
            for (std::size_t c = 0; c < n_columns; ++c) {
                char* after = nullptr;
                errno = 0;
                const double v = std::strtod(q, &after);
                if (after == q || errno == ERANGE)
                    throw FormatError("non-numeric value in row " + std::to_string(row + 1));
                columns[c].push_back(v);
                q = after;
                while (q < line_end && (*q == ' ' || *q == '\t' || *q == '\r')) ++q;
                if (c + 1 < n_columns) {
                    if (q >= line_end || *q != ',')
                        throw FormatError("expected " + std::to_string(n_columns) +
                                          " columns in row " + std::to_string(row + 1));
                    ++q;
                }
            }
            while (q < line_end && (*q == ' ' || *q == '\t' || *q == '\r')) ++q;
            if (q != line_end)
                throw FormatError("trailing data in row " + std::to_string(row + 1));
        }
        ++row;
        p = eol ? eol + 1 : end;
    }
    if (row < skip_rows) throw FormatError("file has fewer rows than expected header");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
        // Trim.
        std::size_t a = field.find_first_not_of(" \t\r");
        std::size_t b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    // Shortest representation that round-trips.
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

Table read_table(const std::string& path) {
    const std::string text = read_file(path);
    Table t;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

void write_table(const std::string& path, const Table& t) {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    };
    append_row(t.header);
    for (const auto& r : t.rows) append_row(r);
    write_file(path, out);
}

}  // namespace msb::csvio
