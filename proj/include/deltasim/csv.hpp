// csv.hpp — machine-readable result emission and re-parsing
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "deltasim/constants.hpp"
#include "deltasim/errors.hpp"
#include "deltasim/sweep.hpp"

namespace deltasim {

/// Shortest decimal that round-trips a double bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// UTF-8 CSV: '#'-prefixed header rows (provenance, axes, units), then one
/// row per cell with axis values, output columns and a convergence flag.
/// Non-converged cells carry NaN values and flag 0.
inline void write_result(const SweepResult& res, std::ostream& out) {
    out << "# deltasim result\n";
    out << "# constants: " << constants_version << "\n";
    for (const auto& [key, value] : res.metadata) {
        out << "# " << key << ": " << value << "\n";
    }
    for (const auto& axis : res.axes) {
        out << "# axis: " << axis.name << " [" << axis.unit << "], " << axis.values.size()
            << " points\n";
    }
    out << "# columns:";
    bool first = true;
    for (const auto& axis : res.axes) {
        out << (first ? " " : ",") << axis.name << " [" << axis.unit << "]";
        first = false;
    }
    for (const auto& col : res.columns) {
        out << (first ? " " : ",") << col.name << " [" << col.unit << "]";
        first = false;
    }
    out << (first ? " " : ",") << "converged [0/1]\n";

    const std::size_t n = res.cell_count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto coords = res.cell_coords(i);
        for (std::size_t d = 0; d < coords.size(); ++d) {
            out << (d ? "," : "") << format_double(coords[d]);
        }
        for (const auto& col : res.columns) {
            out << "," << format_double(col.values[i]);
        }
        out << "," << static_cast<int>(res.converged[i]) << "\n";
    }
}

inline void write_result(const SweepResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_result: cannot open " + path);
    write_result(res, out);
    out.flush();
    if (!out) throw std::runtime_error("write_result: write failed for " + path);
}

struct ParsedCsv {
    std::vector<std::string> column_names;          // including axis columns and flag
    std::vector<std::vector<double>> columns;
    std::vector<std::pair<std::string, std::string>> header;
};

inline ParsedCsv read_result(std::istream& in) {
    ParsedCsv parsed;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# columns:", 0) == 0) {
                std::stringstream names(line.substr(10));
                std::string name;
                while (std::getline(names, name, ',')) {
                    const auto bracket = name.find(" [");
                    if (bracket != std::string::npos) name.erase(bracket);
                    const auto start = name.find_first_not_of(' ');
                    parsed.column_names.push_back(start == std::string::npos
                                                      ? name : name.substr(start));
                }
                parsed.columns.resize(parsed.column_names.size());
            } else {
                const auto colon = line.find(": ");
                if (colon != std::string::npos) {
                    parsed.header.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
                }
            }
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(row, cell, ',')) {
            if (c >= parsed.columns.size()) {
                throw std::runtime_error("read_result: row wider than header");
            }
            parsed.columns[c++].push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (c != parsed.columns.size()) {
            throw std::runtime_error("read_result: row narrower than header");
        }
    }
    return parsed;
}

inline ParsedCsv read_result(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_result: cannot open " + path);
    return read_result(in);
}

} // namespace deltasim
