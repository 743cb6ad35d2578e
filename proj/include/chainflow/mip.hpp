#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainflow/core.hpp"

namespace chainflow {

enum class VarKind { Continuous, Binary };
enum class RowSense { LE, EQ, GE };

inline const char* to_string(RowSense s) {
    switch (s) {
        case RowSense::LE: return "<=";
        case RowSense::EQ: return "=";
        case RowSense::GE: return ">=";
    }
    return "?";
}

struct Column {
    std::string name;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    double objective = 0.0;
    VarKind kind = VarKind::Continuous;

    bool fixed() const { return lower == upper; }
};

struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (column id, coefficient)
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
};

// Standard-form minimization program: columns with bounds and objective
// coefficients, sparse rows with a sense and right-hand side.
struct MixedIntegerProgram {
    std::string name = "CHAINFLOW";
    std::vector<Column> columns;
    std::vector<Row> rows;

    int add_column(std::string col_name, double lower, double upper, double objective,
                   VarKind kind = VarKind::Continuous) {
        columns.push_back({std::move(col_name), lower, upper, objective, kind});
        return static_cast<int>(columns.size()) - 1;
    }

    int add_row(std::string row_name, std::vector<std::pair<int, double>> coeffs, RowSense sense,
                double rhs) {
        rows.push_back({std::move(row_name), std::move(coeffs), sense, rhs});
        return static_cast<int>(rows.size()) - 1;
    }

    void fix_column(int col, double value) {
        columns[static_cast<size_t>(col)].lower = value;
        columns[static_cast<size_t>(col)].upper = value;
    }

    int num_columns() const { return static_cast<int>(columns.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    std::vector<int> binary_columns() const {
        std::vector<int> out;
        for (int j = 0; j < num_columns(); ++j)
            if (columns[static_cast<size_t>(j)].kind == VarKind::Binary) out.push_back(j);
        return out;
    }

    double objective_value(std::span<const double> x) const {
        double obj = 0.0;
        for (size_t j = 0; j < columns.size(); ++j) obj += columns[j].objective * x[j];
        return obj;
    }

    double row_activity(int r, std::span<const double> x) const {
        double act = 0.0;
        for (const auto& [j, a] : rows[static_cast<size_t>(r)].coeffs)
            act += a * x[static_cast<size_t>(j)];
        return act;
    }

    // Signed violation of a row: positive means the row is broken by that much.
    double row_violation(int r, std::span<const double> x) const {
        const Row& row = rows[static_cast<size_t>(r)];
        const double act = row_activity(r, x);
        switch (row.sense) {
            case RowSense::LE: return act - row.rhs;
            case RowSense::GE: return row.rhs - act;
            case RowSense::EQ: return std::fabs(act - row.rhs);
        }
        return 0.0;
    }

    std::map<std::string, int> column_name_index() const {
        std::map<std::string, int> m;
        for (int j = 0; j < num_columns(); ++j) m.emplace(columns[static_cast<size_t>(j)].name, j);
        return m;
    }
};

}  // namespace chainflow
