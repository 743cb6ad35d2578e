#include <doctest.h>

#include <map>
#include <sstream>

#include "support.hpp"

using namespace chainflow;
using testsupport::golden_path;

namespace {

MixedIntegerProgram one_by_one() {
    MixedIntegerProgram p;
    p.name = "FIXTURE";
    p.add_column("X1", 0.0, std::numeric_limits<double>::infinity(), 1.0);
    p.add_row("R1", {{0, 2.0}}, RowSense::LE, 4.0);
    return p;
}

}  // namespace

TEST_CASE("one-column one-row program matches the checked-in fixture byte for byte") {
    const std::string got = write_mps_string(one_by_one());
    const std::string want = read_text_file(golden_path("mps_1x1.mps"));
    CHECK(got == want);
    int lines = 0;
    for (char c : got)
        if (c == '\n') ++lines;
    CHECK(lines == 9);
}

TEST_CASE("binary columns are wrapped in INTORG/INTEND markers") {
    MixedIntegerProgram p;
    p.name = "MIXED";
    p.add_column("c0", 0.0, 5.0, 1.0);
    p.add_column("b0", 0.0, 1.0, 2.0, VarKind::Binary);
    p.add_column("c1", 0.0, 5.0, 3.0);
    p.add_row("r0", {{0, 1.0}, {1, 1.0}, {2, 1.0}}, RowSense::LE, 4.0);
    const std::string text = write_mps_string(p);
    const size_t org = text.find("'INTORG'");
    const size_t b0 = text.find("\n    b0");
    const size_t end = text.find("'INTEND'");
    const size_t c1 = text.find("\n    c1");
    REQUIRE(org != std::string::npos);
    REQUIRE(end != std::string::npos);
    CHECK(org < b0);
    CHECK(b0 < end);
    CHECK(end < c1);
    CHECK(text.find(" BV ") != std::string::npos);
}

TEST_CASE("empty program writes header-only sections") {
    MixedIntegerProgram p;
    p.name = "EMPTY";
    const std::string text = write_mps_string(p);
    CHECK(text.find("NAME") == 0);
    CHECK(text.find("ROWS\n") != std::string::npos);
    CHECK(text.find("COLUMNS\n") != std::string::npos);
    CHECK(text.find("RHS\n") != std::string::npos);
    CHECK(text.find("ENDATA\n") != std::string::npos);
    CHECK(text.find("BOUNDS") == std::string::npos);
}

TEST_CASE("bounds section covers fixed, negative and finite-upper columns") {
    MixedIntegerProgram p;
    p.add_column("fx", 2.0, 2.0, 0.0);
    p.add_column("up", 0.0, 7.5, 0.0);
    p.add_column("lo", -3.0, std::numeric_limits<double>::infinity(), 0.0);
    const std::string text = write_mps_string(p);
    CHECK(text.find(" FX ") != std::string::npos);
    CHECK(text.find(" UP ") != std::string::npos);
    CHECK(text.find(" LO ") != std::string::npos);
}

namespace {

// Minimal independent MPS reader used only to round-trip the writer: splits
// fields on whitespace, honors INTORG/INTEND markers, rebuilds a program.
MixedIntegerProgram parse_mps(const std::string& text) {
    MixedIntegerProgram p;
    std::map<std::string, int> row_of;
    std::map<std::string, int> col_of;
    std::map<std::string, RowSense> sense_of;
    std::vector<std::string> row_order;
    std::string section;
    bool integer_group = false;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        std::string t;
        while (fields >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (line[0] != ' ') {
            section = tok[0];
            if (section == "NAME" && tok.size() > 1) p.name = tok[1];
            continue;
        }
        if (section == "ROWS") {
            REQUIRE(tok.size() == 2);
            if (tok[0] == "N") continue;  // objective row
            sense_of[tok[1]] = tok[0] == "L"   ? RowSense::LE
                               : tok[0] == "G" ? RowSense::GE
                                               : RowSense::EQ;
            row_order.push_back(tok[1]);
        } else if (section == "COLUMNS") {
            if (tok.size() >= 3 && tok[2] == "'INTORG'") { integer_group = true; continue; }
            if (tok.size() >= 3 && tok[2] == "'INTEND'") { integer_group = false; continue; }
            REQUIRE(tok.size() >= 3);
            if (!col_of.count(tok[0]))
                col_of[tok[0]] = p.add_column(tok[0], 0.0,
                                              std::numeric_limits<double>::infinity(), 0.0,
                                              integer_group ? VarKind::Binary
                                                            : VarKind::Continuous);
            const int col = col_of[tok[0]];
            for (size_t f = 1; f + 1 < tok.size(); f += 2) {
                const double value = std::strtod(tok[f + 1].c_str(), nullptr);
                if (tok[f] == "COST") {
                    p.columns[static_cast<size_t>(col)].objective = value;
                } else {
                    if (!row_of.count(tok[f]))
                        row_of[tok[f]] = p.add_row(tok[f], {}, sense_of.at(tok[f]), 0.0);
                    p.rows[static_cast<size_t>(row_of[tok[f]])].coeffs.emplace_back(col, value);
                }
            }
        } else if (section == "RHS") {
            REQUIRE(tok.size() >= 3);
            for (size_t f = 1; f + 1 < tok.size(); f += 2) {
                if (!row_of.count(tok[f]))
                    row_of[tok[f]] = p.add_row(tok[f], {}, sense_of.at(tok[f]), 0.0);
                p.rows[static_cast<size_t>(row_of[tok[f]])].rhs =
                    std::strtod(tok[f + 1].c_str(), nullptr);
            }
        } else if (section == "BOUNDS") {
            const std::string kind = tok[0];
            const std::string name = tok[2];
            REQUIRE(col_of.count(name));
            Column& col = p.columns[static_cast<size_t>(col_of[name])];
            if (kind == "UP") col.upper = std::strtod(tok[3].c_str(), nullptr);
            else if (kind == "LO") col.lower = std::strtod(tok[3].c_str(), nullptr);
            else if (kind == "FX") col.lower = col.upper = std::strtod(tok[3].c_str(), nullptr);
            else if (kind == "MI") col.lower = -std::numeric_limits<double>::infinity();
            else if (kind == "BV") { col.lower = 0.0; col.upper = 1.0; }
        }
    }
    // declare empty rows that carried no entries
    for (const auto& name : row_order)
        if (!row_of.count(name)) row_of[name] = p.add_row(name, {}, sense_of.at(name), 0.0);
    return p;
}

}  // namespace

TEST_CASE("the full flow model round-trips through an independent MPS parse") {
    const SupplyChainInstance desk =
        load_instance(testsupport::data_path("desk7.json"));
    const BuildResult build = build_model(desk, lateness_policy_from_string("1:500"));
    const MixedIntegerProgram parsed = parse_mps(write_mps_string(build.program));

    REQUIRE(parsed.num_columns() == build.program.num_columns());
    REQUIRE(parsed.num_rows() == build.program.num_rows());
    const auto names = build.program.column_name_index();
    const auto parsed_names = parsed.column_name_index();
    for (const auto& [name, col] : names) {
        REQUIRE(parsed_names.count(name));
        const Column& a = build.program.columns[static_cast<size_t>(col)];
        const Column& b = parsed.columns[static_cast<size_t>(parsed_names.at(name))];
        CHECK(a.kind == b.kind);
        CHECK(a.lower == doctest::Approx(b.lower).epsilon(1e-9));
        if (std::isfinite(a.upper)) CHECK(a.upper == doctest::Approx(b.upper).epsilon(1e-9));
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    }
    // relaxations of writer input and parsed output agree
    const SimplexResult original = solve_lp(build.program);
    const SimplexResult recovered = solve_lp(parsed);
    REQUIRE(original.status == LpStatus::Optimal);
    REQUIRE(recovered.status == LpStatus::Optimal);
    CHECK(testsupport::close_rel(original.objective, recovered.objective, 1e-9));
    // and the integer optima agree too
    const SolveReport a = solve_milp(build.program);
    const SolveReport b = solve_milp(parsed);
    CHECK(testsupport::close_rel(a.objective, b.objective, 1e-9));
}

TEST_CASE("external solutions map names to columns") {
    MixedIntegerProgram p;
    p.add_column("y(S1,A1,part)", 0.0, 10.0, 1.0);
    p.add_column("beta(S1,A1,part)", 0.0, 1.0, 1.0, VarKind::Binary);
    p.add_column("slackish", 0.0, 10.0, 0.0);

    SUBCASE("complete file yields the full assignment") {
        const std::string path = "/tmp/chainflow_sol_full.txt";
        write_text_atomic(path,
                          "# solver output\n"
                          "y(S1,A1,part)\t7.25\n"
                          "beta(S1,A1,part)\t1\n"
                          "slackish\t0\n");
        const ExternalSolution sol = read_external_solution(path, p);
        CHECK(sol.warnings.empty());
        CHECK(sol.assignment[0] == doctest::Approx(7.25));
        CHECK(sol.assignment[1] == doctest::Approx(1.0));
    }
    SUBCASE("missing names default to zero with warnings") {
        const std::string path = "/tmp/chainflow_sol_partial.txt";
        write_text_atomic(path, "y(S1,A1,part)\t3\n");
        const ExternalSolution sol = read_external_solution(path, p);
        CHECK(sol.assignment[0] == doctest::Approx(3.0));
        CHECK(sol.assignment[2] == 0.0);
        CHECK(sol.warnings.size() == 2);
    }
    SUBCASE("unknown names are an error") {
        const std::string path = "/tmp/chainflow_sol_unknown.txt";
        write_text_atomic(path, "y(S9,A1,part)\t3\n");
        CHECK_THROWS_WITH_AS(read_external_solution(path, p), doctest::Contains("y(S9,A1,part)"),
                             ChainflowError);
    }
    SUBCASE("unparsable values are an error") {
        const std::string path = "/tmp/chainflow_sol_badval.txt";
        write_text_atomic(path, "slackish\ttwelve\n");
        CHECK_THROWS_AS(read_external_solution(path, p), ChainflowError);
    }
}
