#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "chainflow/simplex.hpp"

namespace chainflow {

enum class MilpStatus { Optimal, Infeasible, NodeLimit, GapReached };

inline const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::NodeLimit: return "node_limit";
        case MilpStatus::GapReached: return "gap_reached";
    }
    return "?";
}

struct SolveOptions {
    double gap_tolerance = 1e-6;         // relative
    double integrality_tolerance = 1e-6;
    double feasibility_tolerance = 1e-7;
    long node_limit = 1000000;
    bool deterministic = true;  // fixed tie rules, wall time reported as 0
};

struct SolveReport {
    MilpStatus status = MilpStatus::Infeasible;
    std::vector<double> assignment;  // per column; empty when no incumbent exists
    double objective = std::numeric_limits<double>::infinity();
    double best_bound = std::numeric_limits<double>::infinity();
    double relative_gap = 0.0;
    long nodes = 0;
    double wall_seconds = 0.0;
    std::vector<double> bound_history;  // pool minimum before each processed node
};

inline std::string to_string(const SolveReport& r) {
    std::string out;
    out += "status "; out += to_string(r.status); out += "\n";
    out += "objective " + fmt_num_exact(r.objective) + "\n";
    out += "best_bound " + fmt_num_exact(r.best_bound) + "\n";
    out += "relative_gap " + fmt_num_exact(r.relative_gap) + "\n";
    out += "nodes " + std::to_string(r.nodes) + "\n";
    out += "wall_seconds " + fmt_num_exact(r.wall_seconds) + "\n";
    for (size_t j = 0; j < r.assignment.size(); ++j)
        out += "x" + std::to_string(j) + " " + fmt_num_exact(r.assignment[j]) + "\n";
    return out;
}

namespace detail {

struct BnbNode {
    long id = 0;
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> fixings;  // (binary column, value)
};

struct BnbNodeOrder {
    // min-heap on (bound, id)
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

inline double relative_gap(double incumbent, double bound) {
    if (!std::isfinite(incumbent)) return std::numeric_limits<double>::infinity();
    return (incumbent - bound) / std::max(1.0, std::fabs(incumbent));
}

}  // namespace detail

// Branch and bound over the binary columns. Node selection is best bound
// (ties: lowest node id) interleaved with depth-first plunges: after each
// branching, the child on the rounded side of the fractional value is
// processed immediately, which finds incumbents early and lets the bound
// pruning bite. Branching picks the most fractional binary (ties: lowest
// column id). Incumbents are re-solved with all binaries pinned to the
// rounded point so reported solutions are exactly integral.
inline SolveReport solve_milp(const MixedIntegerProgram& p, const SolveOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    LpOptions lp_opts;
    lp_opts.feas_tol = opts.feasibility_tolerance;

    const int n = p.num_columns();
    std::vector<double> root_lo(static_cast<size_t>(n)), root_up(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        root_lo[static_cast<size_t>(j)] = p.columns[static_cast<size_t>(j)].lower;
        root_up[static_cast<size_t>(j)] = p.columns[static_cast<size_t>(j)].upper;
    }
    const std::vector<int> binaries = p.binary_columns();

    SolveReport report;
    double incumbent_obj = std::numeric_limits<double>::infinity();
    std::vector<double> incumbent_x;

    std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::BnbNodeOrder> pool;
    std::vector<detail::BnbNode> dive;  // LIFO plunge stack
    pool.push({0, -std::numeric_limits<double>::infinity(), {}});
    long next_id = 1;
    long processed = 0;
    double exhausted_bound = std::numeric_limits<double>::infinity();

    auto global_bound = [&]() {
        double b = pool.empty() ? std::numeric_limits<double>::infinity() : pool.top().bound;
        for (const auto& nd : dive) b = std::min(b, nd.bound);
        return b;
    };

    std::vector<double> lo, up;
    while (!pool.empty() || !dive.empty()) {
        if (processed >= opts.node_limit) {
            report.status = MilpStatus::NodeLimit;
            break;
        }
        const double prune_eps = std::max(1e-9, 1e-9 * std::fabs(incumbent_obj));
        detail::BnbNode node;
        if (!dive.empty()) {
            node = std::move(dive.back());
            dive.pop_back();
            if (std::isfinite(incumbent_obj) && node.bound >= incumbent_obj - prune_eps) continue;
        } else {
            node = pool.top();
            pool.pop();
            if (std::isfinite(incumbent_obj) && node.bound >= incumbent_obj - prune_eps) {
                // Best-bound order: every remaining pool node is at least as bad.
                exhausted_bound = node.bound;
                while (!pool.empty()) pool.pop();
                continue;
            }
        }
        ++processed;
        {
            const double gb = std::isfinite(node.bound) ? std::min(node.bound, global_bound())
                                                        : global_bound();
            if (std::isfinite(gb)) report.bound_history.push_back(gb);
        }

        lo = root_lo;
        up = root_up;
        for (const auto& [col, v] : node.fixings) {
            lo[static_cast<size_t>(col)] = v;
            up[static_cast<size_t>(col)] = v;
        }
        const SimplexResult lp = solve_lp(p, lo, up, lp_opts);
        if (lp.status == LpStatus::Infeasible) continue;
        if (lp.status == LpStatus::Unbounded)
            throw ChainflowError("solve_milp: relaxation is unbounded");
        if (std::isfinite(incumbent_obj) && lp.objective >= incumbent_obj - prune_eps) continue;

        // Most fractional binary, ties broken by lowest column id.
        int branch_col = -1;
        double branch_score = -1.0;
        for (int col : binaries) {
            const double v = lp.x[static_cast<size_t>(col)];
            const double frac = v - std::floor(v);
            const double dist = std::min(frac, 1.0 - frac);
            if (dist > opts.integrality_tolerance && dist > branch_score + 1e-15) {
                branch_score = dist;
                branch_col = col;
            }
        }

        if (branch_col < 0) {
            // Integral point: pin every binary to its rounded value and
            // re-solve so the incumbent carries exact 0/1 entries.
            std::vector<double> flo = lo, fup = up;
            for (int col : binaries) {
                const double v = std::round(lp.x[static_cast<size_t>(col)]);
                flo[static_cast<size_t>(col)] = v;
                fup[static_cast<size_t>(col)] = v;
            }
            SimplexResult fixed = solve_lp(p, flo, fup, lp_opts);
            const SimplexResult& use = fixed.status == LpStatus::Optimal ? fixed : lp;
            if (use.objective < incumbent_obj - 1e-12) {
                incumbent_obj = use.objective;
                incumbent_x = use.x;
                if (fixed.status == LpStatus::Optimal)
                    for (int col : binaries)
                        incumbent_x[static_cast<size_t>(col)] = flo[static_cast<size_t>(col)];
            }
            continue;
        }

        const double frac = lp.x[static_cast<size_t>(branch_col)] -
                            std::floor(lp.x[static_cast<size_t>(branch_col)]);
        detail::BnbNode down{next_id++, lp.objective, node.fixings};
        down.fixings.emplace_back(branch_col, 0.0);
        detail::BnbNode upn{next_id++, lp.objective, node.fixings};
        upn.fixings.emplace_back(branch_col, 1.0);
        if (frac >= 0.5) {
            pool.push(std::move(down));
            dive.push_back(std::move(upn));
        } else {
            pool.push(std::move(upn));
            dive.push_back(std::move(down));
        }

        if (std::isfinite(incumbent_obj)) {
            const double gap = detail::relative_gap(incumbent_obj, global_bound());
            if (gap <= opts.gap_tolerance && gap > 0.0) {
                report.status = MilpStatus::GapReached;
                break;
            }
        }
    }

    report.nodes = processed;
    const double remaining = std::min(global_bound(), exhausted_bound);
    if (std::isfinite(incumbent_obj)) {
        if (report.status != MilpStatus::NodeLimit && report.status != MilpStatus::GapReached)
            report.status = MilpStatus::Optimal;
        report.objective = incumbent_obj;
        report.assignment = incumbent_x;
        report.best_bound = report.status == MilpStatus::Optimal
                                ? incumbent_obj
                                : std::min(incumbent_obj, remaining);
        report.relative_gap = report.status == MilpStatus::Optimal
                                  ? 0.0
                                  : detail::relative_gap(incumbent_obj, report.best_bound);
    } else if (report.status == MilpStatus::NodeLimit) {
        report.best_bound = remaining;
    } else {
        report.status = MilpStatus::Infeasible;
    }
    if (!opts.deterministic)
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// Exhaustive oracle: enumerates every assignment of the free binary columns,
// solves the remaining LP, and keeps the best. Exact up to LP tolerances.
inline SolveReport brute_force_milp(const MixedIntegerProgram& p, int binary_limit = 20,
                                    const SolveOptions& opts = {}) {
    LpOptions lp_opts;
    lp_opts.feas_tol = opts.feasibility_tolerance;

    const int n = p.num_columns();
    std::vector<double> lo(static_cast<size_t>(n)), up(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        lo[static_cast<size_t>(j)] = p.columns[static_cast<size_t>(j)].lower;
        up[static_cast<size_t>(j)] = p.columns[static_cast<size_t>(j)].upper;
    }
    std::vector<int> free_bins;
    for (int col : p.binary_columns())
        if (lo[static_cast<size_t>(col)] < up[static_cast<size_t>(col)]) free_bins.push_back(col);
    if (static_cast<int>(free_bins.size()) > binary_limit)
        throw ChainflowError("brute_force_milp: " + std::to_string(free_bins.size()) +
                             " free binaries exceed the limit of " + std::to_string(binary_limit));

    SolveReport report;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;

    const unsigned long combos = 1UL << free_bins.size();
    for (unsigned long mask = 0; mask < combos; ++mask) {
        std::vector<double> clo = lo, cup = up;
        for (size_t b = 0; b < free_bins.size(); ++b) {
            const double v = (mask >> b) & 1UL ? 1.0 : 0.0;
            clo[static_cast<size_t>(free_bins[b])] = v;
            cup[static_cast<size_t>(free_bins[b])] = v;
        }
        const SimplexResult lp = solve_lp(p, clo, cup, lp_opts);
        ++report.nodes;
        if (lp.status != LpStatus::Optimal) continue;
        if (lp.objective < best_obj - 1e-12) {
            best_obj = lp.objective;
            best_x = lp.x;
            for (size_t b = 0; b < free_bins.size(); ++b)
                best_x[static_cast<size_t>(free_bins[b])] = (mask >> b) & 1UL ? 1.0 : 0.0;
        }
    }

    if (std::isfinite(best_obj)) {
        report.status = MilpStatus::Optimal;
        report.objective = best_obj;
        report.best_bound = best_obj;
        report.relative_gap = 0.0;
        report.assignment = std::move(best_x);
    } else {
        report.status = MilpStatus::Infeasible;
    }
    return report;
}

}  // namespace chainflow
