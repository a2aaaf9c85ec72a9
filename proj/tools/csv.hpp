#pragma once

// Minimal CSV reading for annotation files: header row, comma separated,
// no quoting.

#include <fstream>
#include <string>
#include <vector>

#include "nucleograde/error.hpp"

namespace cli {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Throws IoError on unreadable files and InvalidArgument on missing columns.
inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& required) {
    std::ifstream in(path);
    if (!in) throw nucleograde::Error(nucleograde::ErrorCode::IoError, "cannot read " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw nucleograde::Error(nucleograde::ErrorCode::IoError, path + " is empty");
    t.header = split(line);
    for (const auto& r : required) {
        if (t.column(r) < 0) {
            throw nucleograde::Error(nucleograde::ErrorCode::InvalidArgument, path + ": missing column '" + r + "'");
        }
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size()) {
            throw nucleograde::Error(nucleograde::ErrorCode::InvalidArgument,
                                     path + ":" + std::to_string(lineno) + ": wrong number of fields");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw nucleograde::Error(nucleograde::ErrorCode::InvalidArgument, where + ": not a number '" + s + "'");
}

inline int to_int(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw nucleograde::Error(nucleograde::ErrorCode::InvalidArgument, where + ": not an integer '" + s + "'");
}

}  // namespace cli
