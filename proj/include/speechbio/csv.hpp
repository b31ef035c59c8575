#pragma once

// Minimal comma separated tables: no quoting, one record per line.

#include "speechbio/common.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace speechbio {

struct csv_table {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    /// Index of a named column, or throws.
    [[nodiscard]] std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw parse_error{ path, 1, "missing column '" + name + "'" };
    }
};

inline csv_table read_csv(const std::string &path) {
    std::ifstream in{ path };
    if (!in) {
        throw error{ "cannot open " + path };
    }
    csv_table t;
    t.path = path;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split(line, ',');
        for (auto &f : fields) {
            f = trim(f);
        }
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw parse_error{ path, row, "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()) };
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(row);
    }
    if (t.header.empty()) {
        throw parse_error{ path, 1, "empty file" };
    }
    return t;
}

inline std::string join(const std::vector<std::string> &parts, const std::string &sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

}  // namespace speechbio
