#pragma once

// Minimal comma-separated reader shared by the fleet, profile and trajectory
// loaders. No quoting; '#' starts a comment line.

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "vrp/errors.hpp"

namespace vrp::csv {

struct Row {
    int line = 0;
    std::vector<std::string> cells;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Table {
    std::string path;
    int header_line = 0;
    std::vector<std::string> header;
    std::vector<Row> rows;

    [[noreturn]] void error(int line, const std::string& msg) const {
        fail(ErrorKind::Parse, path + ":" + std::to_string(line) + ": " + msg);
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        error(header_line, "missing column '" + name + "'");
    }

    double number(const Row& row, std::size_t col) const {
        if (col >= row.cells.size()) error(row.line, "too few fields");
        const std::string& s = row.cells[col];
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            error(row.line, "not a number: '" + s + "'");
        }
        return v;
    }
};

inline Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, path + ": cannot open file");
    Table t;
    t.path = path;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(s);
            t.header_line = n;
            continue;
        }
        t.rows.push_back({n, split(s)});
    }
    if (t.header.empty()) fail(ErrorKind::Parse, path + ":1: empty file, expected a header row");
    return t;
}

}  // namespace vrp::csv
