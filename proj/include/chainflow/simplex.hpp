#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chainflow/mip.hpp"

namespace chainflow {

struct LpOptions {
    double feas_tol = 1e-7;        // bound/row feasibility tolerance
    double opt_tol = 1e-9;         // reduced-cost optimality tolerance
    int refactor_every = 500;      // pivots between preventive refactorizations
    int stall_threshold = 100;     // degenerate pivots before Bland's rule kicks in
    long max_iterations = 0;       // 0 = derived from problem size
    double residual_limit = 1e-5;  // instability threshold after refactorization
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

enum class ColStatus : unsigned char { Basic, AtLower, AtUpper, FreeAtZero };

struct SimplexResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;              // structural primal values
    std::vector<int> basis;             // basic column per row; ids >= n are slacks
    std::vector<double> reduced_costs;  // structural + slack columns
    std::vector<ColStatus> col_status;  // structural + slack columns
    long iterations = 0;
};

namespace detail {

// Bounded-variable primal simplex on a dense tableau. Phase 1 minimizes the
// sum of artificial columns patched onto rows whose slack cannot absorb the
// initial residual; phase 2 minimizes the real objective. Dantzig pricing
// with a Bland fallback once pivots stall. Every tie breaks on the lowest
// index, so a given program always yields the same result.
class SimplexEngine {
  public:
    SimplexEngine(const MixedIntegerProgram& p, std::span<const double> lo,
                  std::span<const double> up, const LpOptions& opts)
        : prog_(p), opts_(opts), n_(p.num_columns()), m_(p.num_rows()) {
        const double inf = std::numeric_limits<double>::infinity();
        lower_.assign(lo.begin(), lo.end());
        upper_.assign(up.begin(), up.end());
        cost_.resize(static_cast<size_t>(n_));
        for (int j = 0; j < n_; ++j) cost_[sz(j)] = p.columns[sz(j)].objective;
        for (int i = 0; i < m_; ++i) {
            switch (p.rows[sz(i)].sense) {
                case RowSense::LE: lower_.push_back(0.0); upper_.push_back(inf); break;
                case RowSense::GE: lower_.push_back(-inf); upper_.push_back(0.0); break;
                case RowSense::EQ: lower_.push_back(0.0); upper_.push_back(0.0); break;
            }
            cost_.push_back(0.0);
        }
        ncols_ = n_ + m_;
    }

    SimplexResult run() {
        SimplexResult res;
        for (int j = 0; j < n_; ++j)
            if (lower_[sz(j)] > upper_[sz(j)] + opts_.feas_tol) return res;  // Infeasible

        init_basis();
        max_iters_ = opts_.max_iterations > 0 ? opts_.max_iterations
                                              : 20000L + 200L * static_cast<long>(m_ + total_);

        if (has_artificials_) {
            phase1_ = true;
            recompute_costs();
            if (!iterate()) throw ChainflowError("simplex: unbounded phase-1 direction");
            if (phase1_objective() > opts_.feas_tol * 10.0) {
                res.status = LpStatus::Infeasible;
                res.iterations = iterations_;
                return res;
            }
            expel_artificials();
        }
        phase1_ = false;
        freeze_artificials();
        recompute_costs();

        bool bounded = iterate();
        // Clean pass: refactorize when the cheap residual check reports drift,
        // then re-price; new candidates mean the stop was premature. Optimal
        // is only reported once a freshly recomputed cost row prices out.
        int clean_rounds = 0;
        while (bounded) {
            if (primal_residual() > opts_.feas_tol * 10.0) {
                refactorize();
                if (primal_residual() > opts_.residual_limit)
                    throw ChainflowError("simplex: numerical instability, residual " +
                                         fmt_num(primal_residual()));
            }
            recompute_costs();
            if (price(false).first < 0) break;
            if (++clean_rounds > 3)
                throw ChainflowError("simplex: failed to certify optimality");
            bounded = iterate();
        }

        res.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
        res.iterations = iterations_;
        res.objective = current_objective();
        res.x.resize(sz(n_));
        for (int j = 0; j < n_; ++j) res.x[sz(j)] = value_of(j);
        res.basis = basis_;
        res.reduced_costs.assign(d_.begin(), d_.begin() + ncols_);
        res.col_status.assign(status_.begin(), status_.begin() + ncols_);
        return res;
    }

  private:
    static size_t sz(int i) { return static_cast<size_t>(i); }

    const MixedIntegerProgram& prog_;
    LpOptions opts_;
    int n_ = 0, m_ = 0, ncols_ = 0, total_ = 0;
    std::vector<double> lower_, upper_, cost_;
    std::vector<double> tab_;  // m_ x total_ row-major: B^{-1} [A | I | arts]
    std::vector<double> d_;    // reduced costs for the active phase
    std::vector<double> xb_;   // basic values per row
    std::vector<double> val_;  // resting values of nonbasic columns
    std::vector<int> basis_;
    std::vector<int> row_of_;
    std::vector<ColStatus> status_;
    std::vector<std::pair<int, double>> art_coeff_;  // (row, sign) per artificial
    bool has_artificials_ = false;
    bool phase1_ = false;
    long iterations_ = 0, max_iters_ = 0;
    int degenerate_run_ = 0;
    int pivots_since_refactor_ = 0;

    double tab(int i, int j) const { return tab_[sz(i) * sz(total_) + sz(j)]; }
    bool is_artificial(int j) const { return j >= ncols_; }

    double value_of(int j) const {
        return status_[sz(j)] == ColStatus::Basic ? xb_[sz(row_of_[sz(j)])] : val_[sz(j)];
    }

    double phase_cost(int j) const {
        return phase1_ ? (is_artificial(j) ? 1.0 : 0.0) : cost_[sz(j)];
    }

    void init_basis() {
        status_.assign(sz(ncols_), ColStatus::AtLower);
        val_.assign(sz(ncols_), 0.0);
        for (int j = 0; j < ncols_; ++j) {
            if (std::isfinite(lower_[sz(j)])) {
                status_[sz(j)] = ColStatus::AtLower;
                val_[sz(j)] = lower_[sz(j)];
            } else if (std::isfinite(upper_[sz(j)])) {
                status_[sz(j)] = ColStatus::AtUpper;
                val_[sz(j)] = upper_[sz(j)];
            } else {
                status_[sz(j)] = ColStatus::FreeAtZero;
            }
        }

        // Residual each row must place in its slack (or an artificial).
        art_coeff_.clear();
        std::vector<double> want(sz(m_));
        for (int i = 0; i < m_; ++i) {
            double acc = prog_.rows[sz(i)].rhs;
            for (const auto& [j, a] : prog_.rows[sz(i)].coeffs) acc -= a * val_[sz(j)];
            want[sz(i)] = acc;
        }
        std::vector<int> art_col(sz(m_), -1);
        total_ = ncols_;
        for (int i = 0; i < m_; ++i) {
            const int sj = n_ + i;
            if (want[sz(i)] < lower_[sz(sj)] - opts_.feas_tol ||
                want[sz(i)] > upper_[sz(sj)] + opts_.feas_tol)
                art_col[sz(i)] = total_++;
        }
        has_artificials_ = total_ > ncols_;

        lower_.resize(sz(total_), 0.0);
        upper_.resize(sz(total_), std::numeric_limits<double>::infinity());
        cost_.resize(sz(total_), 0.0);
        val_.resize(sz(total_), 0.0);
        status_.resize(sz(total_), ColStatus::AtLower);

        tab_.assign(sz(m_) * sz(total_), 0.0);
        basis_.assign(sz(m_), -1);
        row_of_.assign(sz(total_), -1);
        xb_.assign(sz(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            for (const auto& [j, a] : prog_.rows[sz(i)].coeffs)
                tab_[sz(i) * sz(total_) + sz(j)] += a;
            tab_[sz(i) * sz(total_) + sz(n_ + i)] = 1.0;
        }
        for (int i = 0; i < m_; ++i) {
            const int sj = n_ + i;
            if (art_col[sz(i)] < 0) {
                basis_[sz(i)] = sj;
                row_of_[sz(sj)] = i;
                status_[sz(sj)] = ColStatus::Basic;
                xb_[sz(i)] = want[sz(i)];
            } else {
                // Pin the slack at its nearest bound; the artificial absorbs the rest.
                const double pin = want[sz(i)] < lower_[sz(sj)] ? lower_[sz(sj)] : upper_[sz(sj)];
                status_[sz(sj)] = want[sz(i)] < lower_[sz(sj)] ? ColStatus::AtLower : ColStatus::AtUpper;
                val_[sz(sj)] = pin;
                const int aj = art_col[sz(i)];
                const double residual = want[sz(i)] - pin;
                const double sign = residual >= 0.0 ? 1.0 : -1.0;
                art_coeff_.emplace_back(i, sign);
                tab_[sz(i) * sz(total_) + sz(aj)] = sign;
                if (sign < 0.0) {
                    // Normalize the basis column to +1 so the tableau stays
                    // B^{-1}[A | I | arts] with B an identity.
                    double* row = &tab_[sz(i) * sz(total_)];
                    for (int c = 0; c < total_; ++c) row[c] = -row[c];
                }
                basis_[sz(i)] = aj;
                row_of_[sz(aj)] = i;
                status_[sz(aj)] = ColStatus::Basic;
                xb_[sz(i)] = sign * residual;  // = |residual| >= 0
            }
        }
        d_.assign(sz(total_), 0.0);
    }

    double phase1_objective() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
            if (is_artificial(basis_[sz(i)])) s += xb_[sz(i)];
        return s;
    }

    double current_objective() const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += cost_[sz(j)] * value_of(j);
        return s;
    }

    void recompute_costs() {
        for (int j = 0; j < total_; ++j) d_[sz(j)] = phase_cost(j);
        for (int i = 0; i < m_; ++i) {
            const double cb = phase_cost(basis_[sz(i)]);
            if (cb == 0.0) continue;
            const double* row = &tab_[sz(i) * sz(total_)];
            for (int j = 0; j < total_; ++j) d_[sz(j)] -= cb * row[j];
        }
        for (int i = 0; i < m_; ++i) d_[sz(basis_[sz(i)])] = 0.0;
    }

    // Entering column and direction; {-1, 0} when the phase prices out.
    std::pair<int, int> price(bool bland) const {
        int best = -1, best_dir = 0;
        double best_score = 0.0;
        for (int j = 0; j < total_; ++j) {
            const ColStatus st = status_[sz(j)];
            if (st == ColStatus::Basic) continue;
            if (lower_[sz(j)] == upper_[sz(j)]) continue;
            if (!phase1_ && is_artificial(j)) continue;
            const double dj = d_[sz(j)];
            int dir = 0;
            if ((st == ColStatus::AtLower || st == ColStatus::FreeAtZero) && dj < -opts_.opt_tol)
                dir = 1;
            else if ((st == ColStatus::AtUpper || st == ColStatus::FreeAtZero) && dj > opts_.opt_tol)
                dir = -1;
            if (dir == 0) continue;
            if (bland) return {j, dir};
            if (std::fabs(dj) > best_score + 1e-15) {
                best_score = std::fabs(dj);
                best = j;
                best_dir = dir;
            }
        }
        return {best, best_dir};
    }

    bool iterate() {
        bool bland = false;
        while (true) {
            if (iterations_ >= max_iters_)
                throw ChainflowError("simplex: iteration limit exceeded (" +
                                     std::to_string(max_iters_) + ")");
            if (phase1_ && phase1_objective() <= opts_.feas_tol) return true;
            const auto [j, dir] = price(bland);
            if (j < 0) return true;

            // Ratio test: tightest basic bound along the direction, capped by
            // the entering column's own range (a plain bound flip).
            const double range = upper_[sz(j)] - lower_[sz(j)];
            double t_best = std::isfinite(range) ? range : std::numeric_limits<double>::infinity();
            int leave = -1;
            double alpha_best = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double aij = tab(i, j);
                if (std::fabs(aij) <= 1e-9) continue;
                const double alpha = aij * dir;
                const int bj = basis_[sz(i)];
                double t_i;
                if (alpha > 0.0) {
                    if (!std::isfinite(lower_[sz(bj)])) continue;
                    t_i = (xb_[sz(i)] - lower_[sz(bj)]) / alpha;
                } else {
                    if (!std::isfinite(upper_[sz(bj)])) continue;
                    t_i = (upper_[sz(bj)] - xb_[sz(i)]) / (-alpha);
                }
                if (t_i < 0.0) t_i = 0.0;
                if (leave < 0) {
                    if (t_i < t_best - 1e-12) {
                        t_best = t_i;
                        leave = i;
                        alpha_best = std::fabs(aij);
                    }
                } else if (t_i < t_best - 1e-10) {
                    t_best = t_i;
                    leave = i;
                    alpha_best = std::fabs(aij);
                } else if (t_i <= t_best + 1e-10) {
                    const bool take = bland ? basis_[sz(i)] < basis_[sz(leave)]
                                            : std::fabs(aij) > alpha_best;
                    if (take) {
                        t_best = std::min(t_best, t_i);
                        leave = i;
                        alpha_best = std::fabs(aij);
                    }
                }
            }

            if (!std::isfinite(t_best)) {
                if (phase1_) throw ChainflowError("simplex: unbounded phase-1 direction");
                return false;
            }

            degenerate_run_ = t_best <= 1e-11 ? degenerate_run_ + 1 : 0;
            bland = degenerate_run_ > opts_.stall_threshold;

            apply_step(j, dir, t_best, leave);
            ++iterations_;
            if (++pivots_since_refactor_ >= opts_.refactor_every) refactorize();
        }
    }

    void apply_step(int j, int dir, double t, int leave_row) {
        if (leave_row < 0) {
            for (int i = 0; i < m_; ++i) xb_[sz(i)] -= tab(i, j) * dir * t;
            val_[sz(j)] += dir * t;
            status_[sz(j)] = dir > 0 ? ColStatus::AtUpper : ColStatus::AtLower;
            return;
        }
        const double enter_val = val_[sz(j)] + dir * t;
        for (int i = 0; i < m_; ++i)
            if (i != leave_row) xb_[sz(i)] -= tab(i, j) * dir * t;

        const int leaving = basis_[sz(leave_row)];
        const bool hit_lower = dir * tab(leave_row, j) > 0.0;
        if (is_artificial(leaving)) {
            // Once out, an artificial never returns.
            lower_[sz(leaving)] = upper_[sz(leaving)] = 0.0;
            val_[sz(leaving)] = 0.0;
            status_[sz(leaving)] = ColStatus::AtLower;
        } else {
            val_[sz(leaving)] = hit_lower ? lower_[sz(leaving)] : upper_[sz(leaving)];
            status_[sz(leaving)] = hit_lower ? ColStatus::AtLower : ColStatus::AtUpper;
        }
        row_of_[sz(leaving)] = -1;

        double* prow = &tab_[sz(leave_row) * sz(total_)];
        const double inv = 1.0 / prow[j];
        for (int k = 0; k < total_; ++k) prow[k] *= inv;
        prow[j] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == leave_row) continue;
            double* row = &tab_[sz(i) * sz(total_)];
            const double f = row[j];
            if (f == 0.0) continue;
            for (int k = 0; k < total_; ++k) row[k] -= f * prow[k];
            row[j] = 0.0;
        }
        const double fd = d_[sz(j)];
        if (fd != 0.0) {
            for (int k = 0; k < total_; ++k) d_[sz(k)] -= fd * prow[k];
            d_[sz(j)] = 0.0;
        }
        basis_[sz(leave_row)] = j;
        row_of_[sz(j)] = leave_row;
        status_[sz(j)] = ColStatus::Basic;
        xb_[sz(leave_row)] = enter_val;
    }

    // Degenerate pivots that push leftover basic artificials out of the basis.
    void expel_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (!is_artificial(basis_[sz(i)])) continue;
            for (int j = 0; j < ncols_; ++j) {
                if (status_[sz(j)] == ColStatus::Basic) continue;
                if (lower_[sz(j)] == upper_[sz(j)]) continue;
                if (std::fabs(tab(i, j)) > 1e-7) {
                    apply_step(j, 1, 0.0, i);
                    break;
                }
            }
        }
    }

    void freeze_artificials() {
        for (int j = ncols_; j < total_; ++j) {
            lower_[sz(j)] = upper_[sz(j)] = 0.0;
            if (status_[sz(j)] != ColStatus::Basic) {
                val_[sz(j)] = 0.0;
                status_[sz(j)] = ColStatus::AtLower;
            }
        }
    }

    double primal_residual() const {
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            double act = -prog_.rows[sz(i)].rhs;
            for (const auto& [j, a] : prog_.rows[sz(i)].coeffs) act += a * value_of(j);
            act += value_of(n_ + i);
            worst = std::max(worst, std::fabs(act));
        }
        for (size_t a = 0; a < art_coeff_.size(); ++a) {
            const int aj = ncols_ + static_cast<int>(a);
            const double v = value_of(aj);
            if (v != 0.0) {
                // A nonzero artificial is itself a residual on its row.
                worst = std::max(worst, std::fabs(v));
            }
        }
        return worst;
    }

    void refactorize() {
        pivots_since_refactor_ = 0;
        std::vector<int> basis_pos(sz(total_), -1);
        for (int i = 0; i < m_; ++i) basis_pos[sz(basis_[sz(i)])] = i;

        // Assemble the basis matrix from original column data.
        std::vector<double> B(sz(m_) * sz(m_), 0.0);
        for (int r = 0; r < m_; ++r)
            for (const auto& [j, a] : prog_.rows[sz(r)].coeffs) {
                const int pos = basis_pos[sz(j)];
                if (pos >= 0) B[sz(r) * sz(m_) + sz(pos)] += a;
            }
        for (int i = 0; i < m_; ++i) {
            const int pos = basis_pos[sz(n_ + i)];
            if (pos >= 0) B[sz(i) * sz(m_) + sz(pos)] = 1.0;
        }
        for (size_t a = 0; a < art_coeff_.size(); ++a) {
            const int pos = basis_pos[sz(ncols_ + static_cast<int>(a))];
            if (pos >= 0) B[sz(art_coeff_[a].first) * sz(m_) + sz(pos)] = art_coeff_[a].second;
        }

        // In-place LU with partial pivoting.
        std::vector<int> perm(sz(m_));
        for (int i = 0; i < m_; ++i) perm[sz(i)] = i;
        for (int k = 0; k < m_; ++k) {
            int piv = k;
            double best = std::fabs(B[sz(k) * sz(m_) + sz(k)]);
            for (int r = k + 1; r < m_; ++r) {
                const double v = std::fabs(B[sz(r) * sz(m_) + sz(k)]);
                if (v > best) {
                    best = v;
                    piv = r;
                }
            }
            if (best < 1e-12)
                throw ChainflowError("simplex: singular basis during refactorization");
            if (piv != k) {
                for (int c = 0; c < m_; ++c)
                    std::swap(B[sz(piv) * sz(m_) + sz(c)], B[sz(k) * sz(m_) + sz(c)]);
                std::swap(perm[sz(piv)], perm[sz(k)]);
            }
            const double inv = 1.0 / B[sz(k) * sz(m_) + sz(k)];
            for (int r = k + 1; r < m_; ++r) {
                double& f = B[sz(r) * sz(m_) + sz(k)];
                if (f == 0.0) continue;
                f *= inv;
                const double fr = f;
                for (int c = k + 1; c < m_; ++c) B[sz(r) * sz(m_) + sz(c)] -= fr * B[sz(k) * sz(m_) + sz(c)];
            }
        }
        auto lu_solve = [&](std::vector<double>& rhs) {
            std::vector<double> x(sz(m_));
            for (int i = 0; i < m_; ++i) x[sz(i)] = rhs[sz(perm[sz(i)])];
            for (int i = 0; i < m_; ++i)
                for (int k = 0; k < i; ++k) x[sz(i)] -= B[sz(i) * sz(m_) + sz(k)] * x[sz(k)];
            for (int i = m_ - 1; i >= 0; --i) {
                for (int k = i + 1; k < m_; ++k) x[sz(i)] -= B[sz(i) * sz(m_) + sz(k)] * x[sz(k)];
                x[sz(i)] /= B[sz(i) * sz(m_) + sz(i)];
            }
            rhs = std::move(x);
        };

        std::vector<double> col(sz(m_));
        std::vector<double> fresh(sz(m_) * sz(total_), 0.0);
        for (int j = 0; j < total_; ++j) {
            std::fill(col.begin(), col.end(), 0.0);
            if (j < n_) {
                for (int r = 0; r < m_; ++r)
                    for (const auto& [cj, a] : prog_.rows[sz(r)].coeffs)
                        if (cj == j) col[sz(r)] += a;
            } else if (j < ncols_) {
                col[sz(j - n_)] = 1.0;
            } else {
                col[sz(art_coeff_[sz(j - ncols_)].first)] = art_coeff_[sz(j - ncols_)].second;
            }
            lu_solve(col);
            for (int i = 0; i < m_; ++i) fresh[sz(i) * sz(total_) + sz(j)] = col[sz(i)];
        }
        tab_ = std::move(fresh);

        std::vector<double> rhs(sz(m_));
        for (int i = 0; i < m_; ++i) {
            double acc = prog_.rows[sz(i)].rhs;
            for (const auto& [j, a] : prog_.rows[sz(i)].coeffs)
                if (status_[sz(j)] != ColStatus::Basic) acc -= a * val_[sz(j)];
            if (status_[sz(n_ + i)] != ColStatus::Basic) acc -= val_[sz(n_ + i)];
            rhs[sz(i)] = acc;
        }
        lu_solve(rhs);
        xb_ = std::move(rhs);
        recompute_costs();
    }
};

}  // namespace detail

inline SimplexResult solve_lp(const MixedIntegerProgram& p, std::span<const double> lo,
                              std::span<const double> up, const LpOptions& opts = {}) {
    detail::SimplexEngine eng(p, lo, up, opts);
    return eng.run();
}

// Solves the LP relaxation: integrality marks are ignored, bounds are kept.
inline SimplexResult solve_lp(const MixedIntegerProgram& p, const LpOptions& opts = {}) {
    std::vector<double> lo(p.columns.size()), up(p.columns.size());
    for (size_t j = 0; j < p.columns.size(); ++j) {
        lo[j] = p.columns[j].lower;
        up[j] = p.columns[j].upper;
    }
    return solve_lp(p, lo, up, opts);
}

}  // namespace chainflow
