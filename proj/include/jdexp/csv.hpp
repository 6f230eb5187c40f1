// SPDX-License-Identifier: MIT
#pragma once

// Minimal CSV: comma separated, '.' decimals, mandatory header row, LF line endings.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jdexp/errors.hpp"

namespace jdexp::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw SchemaError("header", "missing column '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    for (auto& c : out) {
        const auto b = c.find_first_not_of(" \t\r");
        const auto e = c.find_last_not_of(" \t\r");
        c = b == std::string::npos ? std::string{} : c.substr(b, e - b + 1);
    }
    return out;
}

inline CsvTable parse_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw SchemaError("row " + std::to_string(t.rows.size() + 1), "column count differs from header");
        t.rows.push_back(std::move(cells));
    }
    if (!have_header)
        throw SchemaError("header", "CSV file is empty");
    return t;
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SchemaError(path, "cannot open file");
    return parse_csv(in);
}

inline double parse_number(const std::string& s, const std::string& where)
{
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || s.empty())
        throw SchemaError(where, "not a number: '" + s + "'");
    return v;
}

/// Shortest representation that round-trips.
inline std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("NA");
}

}  // namespace jdexp::io
