#pragma once

#include <cctype>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "chainflow/mip.hpp"

namespace chainflow {

namespace detail {

inline std::string mps_field(const std::string& s, size_t width) {
    std::string out = s;
    if (out.size() + 2 <= width)
        out.append(width - out.size(), ' ');
    else
        out.append(2, ' ');
    return out;
}

inline std::string mps_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void mps_push_line(std::string& out, std::string line) {
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
}

}  // namespace detail

// Fixed-format MPS writer. Binary columns are wrapped in INTORG/INTEND
// markers; bounds matching the MPS defaults (lower 0, upper +inf) are not
// emitted. Objective row is named COST and the model minimizes it.
inline std::string write_mps_string(const MixedIntegerProgram& p) {
    using detail::mps_field;
    using detail::mps_num;
    using detail::mps_push_line;
    const double inf = std::numeric_limits<double>::infinity();

    std::string out;
    mps_push_line(out, "NAME          " + p.name);
    mps_push_line(out, "ROWS");
    mps_push_line(out, " N  COST");
    for (const auto& row : p.rows) {
        const char* sense = row.sense == RowSense::LE ? " L  "
                            : row.sense == RowSense::GE ? " G  "
                                                        : " E  ";
        mps_push_line(out, sense + row.name);
    }

    // Column-major entry lists, rows in declaration order.
    std::vector<std::vector<std::pair<std::string, double>>> entries(p.columns.size());
    for (size_t j = 0; j < p.columns.size(); ++j)
        if (p.columns[j].objective != 0.0) entries[j].emplace_back("COST", p.columns[j].objective);
    for (const auto& row : p.rows)
        for (const auto& [j, a] : row.coeffs)
            if (a != 0.0) entries[static_cast<size_t>(j)].emplace_back(row.name, a);
    for (size_t j = 0; j < p.columns.size(); ++j)
        if (entries[j].empty()) entries[j].emplace_back("COST", 0.0);  // declare the column

    mps_push_line(out, "COLUMNS");
    bool in_integer_group = false;
    int marker_count = 0;
    for (size_t j = 0; j < p.columns.size(); ++j) {
        const Column& col = p.columns[j];
        const bool want_integer = col.kind == VarKind::Binary;
        if (want_integer != in_integer_group) {
            const char* tag = want_integer ? "'INTORG'" : "'INTEND'";
            mps_push_line(out, "    " + mps_field("MARKER" + std::to_string(marker_count++), 10) +
                                   mps_field("'MARKER'", 10) + tag);
            in_integer_group = want_integer;
        }
        for (size_t e = 0; e < entries[j].size(); e += 2) {
            std::string line = "    " + mps_field(col.name, 10) +
                               mps_field(entries[j][e].first, 10) + mps_num(entries[j][e].second);
            if (e + 1 < entries[j].size()) {
                line = "    " + mps_field(col.name, 10) + mps_field(entries[j][e].first, 10) +
                       mps_field(mps_num(entries[j][e].second), 10) +
                       mps_field(entries[j][e + 1].first, 10) + mps_num(entries[j][e + 1].second);
            }
            mps_push_line(out, line);
        }
    }
    if (in_integer_group)
        mps_push_line(out, "    " + mps_field("MARKER" + std::to_string(marker_count++), 10) +
                               mps_field("'MARKER'", 10) + "'INTEND'");

    mps_push_line(out, "RHS");
    for (const auto& row : p.rows)
        if (row.rhs != 0.0)
            mps_push_line(out, "    " + detail::mps_field("RHS", 10) + detail::mps_field(row.name, 10) +
                                   detail::mps_num(row.rhs));

    // Bounds only where they differ from the MPS defaults.
    std::string bounds;
    for (const auto& col : p.columns) {
        if (col.kind == VarKind::Binary && col.lower == 0.0 && col.upper == 1.0) {
            mps_push_line(bounds, " BV " + detail::mps_field("BND", 10) + col.name);
            continue;
        }
        if (col.lower == col.upper) {
            mps_push_line(bounds, " FX " + detail::mps_field("BND", 10) +
                                      detail::mps_field(col.name, 10) + detail::mps_num(col.lower));
            continue;
        }
        if (col.lower != 0.0) {
            if (col.lower == -inf)
                mps_push_line(bounds, " MI " + detail::mps_field("BND", 10) + col.name);
            else
                mps_push_line(bounds, " LO " + detail::mps_field("BND", 10) +
                                          detail::mps_field(col.name, 10) + detail::mps_num(col.lower));
        }
        if (col.upper != inf)
            mps_push_line(bounds, " UP " + detail::mps_field("BND", 10) +
                                      detail::mps_field(col.name, 10) + detail::mps_num(col.upper));
    }
    if (!bounds.empty()) {
        mps_push_line(out, "BOUNDS");
        out += bounds;
    }
    mps_push_line(out, "ENDATA");
    return out;
}

inline void write_mps(const MixedIntegerProgram& p, const std::string& path) {
    write_text_atomic(path, write_mps_string(p));
}

struct ExternalSolution {
    std::vector<double> assignment;     // aligned to program columns, absent names are 0
    std::vector<std::string> warnings;  // one entry per defaulted column
};

// Reads `name<TAB>value` lines (any whitespace accepted); '#' starts a comment.
inline ExternalSolution read_external_solution(const std::string& path,
                                               const MixedIntegerProgram& p) {
    const std::string text = read_text_file(path);
    const auto name_to_col = p.column_name_index();
    ExternalSolution sol;
    sol.assignment.assign(p.columns.size(), 0.0);
    std::vector<bool> seen(p.columns.size(), false);

    size_t lineno = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_first_of(" \t", a);
        if (b == std::string::npos)
            throw ChainflowError(path + ":" + std::to_string(lineno) + ": expected name<TAB>value");
        const std::string name = line.substr(a, b - a);
        size_t c = line.find_first_not_of(" \t", b);
        if (c == std::string::npos)
            throw ChainflowError(path + ":" + std::to_string(lineno) + ": missing value for '" +
                                 name + "'");
        std::string value_str = line.substr(c);
        while (!value_str.empty() && (value_str.back() == ' ' || value_str.back() == '\t' ||
                                      value_str.back() == '\r'))
            value_str.pop_back();
        char* end = nullptr;
        const double value = std::strtod(value_str.c_str(), &end);
        if (end == value_str.c_str() || *end != '\0')
            throw ChainflowError(path + ":" + std::to_string(lineno) + ": unparsable value '" +
                                 value_str + "'");
        auto it = name_to_col.find(name);
        if (it == name_to_col.end())
            throw ChainflowError(path + ":" + std::to_string(lineno) + ": unknown column name '" +
                                 name + "'");
        sol.assignment[static_cast<size_t>(it->second)] = value;
        seen[static_cast<size_t>(it->second)] = true;
    }
    for (size_t j = 0; j < seen.size(); ++j)
        if (!seen[j]) sol.warnings.push_back("column '" + p.columns[j].name + "' missing, set to 0");
    return sol;
}

}  // namespace chainflow
