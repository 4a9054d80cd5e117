#pragma once

// Dense two-phase simplex with Bland's anti-cycling rule. Problem sizes in
// this project stay at a few thousand variables, where a dense tableau is
// simple and fast enough. Deterministic: a fixed input always produces the
// same pivots and the same vertex.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace envyfree {

inline constexpr double kLpPivotTol = 1e-10;
inline constexpr double kLpFeasTol = 1e-7;
inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded };

// minimize objective . z
// subject to ge_lhs . z >= ge_rhs, eq_lhs . z = eq_rhs, lower <= z <= upper
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> ge_lhs;
    std::vector<double> ge_rhs;
    std::vector<std::vector<double>> eq_lhs;
    std::vector<double> eq_rhs;
    std::vector<double> lower;  // finite; defaults to 0
    std::vector<double> upper;  // +inf allowed

    int vars() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> z;
    double objective_value = 0.0;
};

namespace detail {

inline void check_program(const LinearProgram& lp) {
    const std::size_t n = lp.objective.size();
    if (n == 0) throw std::invalid_argument("lp: no variables");
    auto check_rows = [n](const std::vector<std::vector<double>>& lhs,
                          const std::vector<double>& rhs, const char* what) {
        if (lhs.size() != rhs.size()) throw std::invalid_argument(std::string("lp: ") + what + " lhs/rhs mismatch");
        for (const auto& row : lhs) {
            if (row.size() != n) throw std::invalid_argument(std::string("lp: ") + what + " row length mismatch");
            for (double v : row)
                if (std::isnan(v)) throw std::invalid_argument("lp: NaN coefficient");
        }
        for (double v : rhs)
            if (std::isnan(v)) throw std::invalid_argument("lp: NaN rhs");
    };
    check_rows(lp.ge_lhs, lp.ge_rhs, "ge");
    check_rows(lp.eq_lhs, lp.eq_rhs, "eq");
    for (double v : lp.objective)
        if (std::isnan(v)) throw std::invalid_argument("lp: NaN objective");
    if (!lp.lower.empty() && lp.lower.size() != n) throw std::invalid_argument("lp: lower size");
    if (!lp.upper.empty() && lp.upper.size() != n) throw std::invalid_argument("lp: upper size");
    for (double v : lp.lower)
        if (!std::isfinite(v)) throw std::invalid_argument("lp: lower bounds must be finite");
    for (double v : lp.upper)
        if (std::isnan(v) || v == -kLpInfinity) throw std::invalid_argument("lp: bad upper bound");
}

class SimplexTableau {
public:
    SimplexTableau(int n_struct) : n_struct_(n_struct) {}

    // row: coeffs over structural vars, relation in {-1: <=, 0: ==, +1: >=}
    void add_row(std::vector<double> coeffs, double rhs, int relation) {
        rows_.push_back({std::move(coeffs), rhs, relation});
    }

    LpStatus run(const std::vector<double>& structural_cost, std::vector<double>& x_out) {
        build();
        // Phase 1: minimize the sum of artificials.
        if (n_art_ > 0) {
            std::vector<double> cost(n_cols_, 0.0);
            for (int j = art_begin_; j < n_cols_; ++j) cost[static_cast<std::size_t>(j)] = 1.0;
            if (iterate(cost, false) == LpStatus::Unbounded)
                return LpStatus::Infeasible;  // phase 1 is bounded below by 0
            if (objective_of(cost) > kLpFeasTol) return LpStatus::Infeasible;
            expel_artificials();
        }
        // Phase 2: minimize the real objective, artificials barred.
        std::vector<double> cost(n_cols_, 0.0);
        for (int j = 0; j < n_struct_; ++j) cost[static_cast<std::size_t>(j)] = structural_cost[static_cast<std::size_t>(j)];
        const LpStatus st = iterate(cost, true);
        if (st != LpStatus::Optimal) return st;
        x_out.assign(static_cast<std::size_t>(n_struct_), 0.0);
        for (std::size_t r = 0; r < T_.size(); ++r) {
            if (basis_[r] < n_struct_) x_out[static_cast<std::size_t>(basis_[r])] = rhs(r);
        }
        return LpStatus::Optimal;
    }

private:
    struct Row {
        std::vector<double> coeffs;
        double rhs;
        int relation;
    };

    void build() {
        const int m = static_cast<int>(rows_.size());
        // Normalize rhs signs first so slack columns can seed the basis.
        int n_slack = 0;
        n_art_ = 0;
        for (auto& row : rows_) {
            if (row.rhs < 0.0) {
                for (auto& v : row.coeffs) v = -v;
                row.rhs = -row.rhs;
                row.relation = -row.relation;
            }
            if (row.relation != 0) ++n_slack;
            if (row.relation >= 0) ++n_art_;  // >= needs surplus+artificial, == needs artificial
        }
        slack_begin_ = n_struct_;
        art_begin_ = n_struct_ + n_slack;
        n_cols_ = art_begin_ + n_art_;
        T_.assign(static_cast<std::size_t>(m),
                  std::vector<double>(static_cast<std::size_t>(n_cols_) + 1, 0.0));
        basis_.assign(static_cast<std::size_t>(m), -1);
        int next_slack = slack_begin_;
        int next_art = art_begin_;
        for (int r = 0; r < m; ++r) {
            auto& row = rows_[static_cast<std::size_t>(r)];
            auto& t = T_[static_cast<std::size_t>(r)];
            for (int j = 0; j < n_struct_; ++j) t[static_cast<std::size_t>(j)] = row.coeffs[static_cast<std::size_t>(j)];
            t[static_cast<std::size_t>(n_cols_)] = row.rhs;
            if (row.relation == -1) {  // <= : slack enters the basis
                t[static_cast<std::size_t>(next_slack)] = 1.0;
                basis_[static_cast<std::size_t>(r)] = next_slack++;
            } else if (row.relation == +1) {  // >= : surplus plus artificial
                t[static_cast<std::size_t>(next_slack)] = -1.0;
                ++next_slack;
                t[static_cast<std::size_t>(next_art)] = 1.0;
                basis_[static_cast<std::size_t>(r)] = next_art++;
            } else {  // == : artificial
                t[static_cast<std::size_t>(next_art)] = 1.0;
                basis_[static_cast<std::size_t>(r)] = next_art++;
            }
        }
    }

    double rhs(std::size_t r) const { return T_[r][static_cast<std::size_t>(n_cols_)]; }

    double objective_of(const std::vector<double>& cost) const {
        double v = 0.0;
        for (std::size_t r = 0; r < T_.size(); ++r) v += cost[static_cast<std::size_t>(basis_[r])] * rhs(r);
        return v;
    }

    double reduced_cost(const std::vector<double>& cost, const std::vector<double>& basis_cost,
                        int j) const {
        double d = cost[static_cast<std::size_t>(j)];
        for (std::size_t r = 0; r < T_.size(); ++r) d -= basis_cost[r] * T_[r][static_cast<std::size_t>(j)];
        return d;
    }

    // Bland's rule: enter the lowest-index improving column, leave on the
    // minimum ratio breaking ties toward the lowest basis index.
    LpStatus iterate(const std::vector<double>& cost, bool bar_artificials) {
        const int col_end = bar_artificials ? art_begin_ : n_cols_;
        for (;;) {
            std::vector<double> basis_cost(T_.size());
            for (std::size_t r = 0; r < T_.size(); ++r) basis_cost[r] = cost[static_cast<std::size_t>(basis_[r])];
            int enter = -1;
            for (int j = 0; j < col_end; ++j) {
                if (reduced_cost(cost, basis_cost, j) < -kLpPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best_ratio = 0.0;
            for (std::size_t r = 0; r < T_.size(); ++r) {
                const double a = T_[r][static_cast<std::size_t>(enter)];
                if (a <= kLpPivotTol) continue;
                const double ratio = rhs(r) / a;
                if (leave < 0 || ratio < best_ratio - kLpPivotTol ||
                    (ratio < best_ratio + kLpPivotTol && basis_[r] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = static_cast<int>(r);
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(static_cast<std::size_t>(leave), enter);
        }
    }

    void pivot(std::size_t r, int j) {
        auto& prow = T_[r];
        const double inv = 1.0 / prow[static_cast<std::size_t>(j)];
        for (auto& v : prow) v *= inv;
        prow[static_cast<std::size_t>(j)] = 1.0;
        for (std::size_t i = 0; i < T_.size(); ++i) {
            if (i == r) continue;
            const double f = T_[i][static_cast<std::size_t>(j)];
            if (std::abs(f) < kLpPivotTol) {
                T_[i][static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            auto& row = T_[i];
            for (std::size_t c = 0; c < row.size(); ++c) row[c] -= f * prow[c];
            row[static_cast<std::size_t>(j)] = 0.0;
        }
        basis_[r] = j;
    }

    // After phase 1, swap basic artificials for structural/slack columns when
    // possible. Rows that admit no pivot are redundant and stay inert.
    void expel_artificials() {
        for (std::size_t r = 0; r < T_.size(); ++r) {
            if (basis_[r] < art_begin_) continue;
            for (int j = 0; j < art_begin_; ++j) {
                if (std::abs(T_[r][static_cast<std::size_t>(j)]) > kLpPivotTol) {
                    pivot(r, j);
                    break;
                }
            }
        }
    }

    int n_struct_;
    int slack_begin_ = 0;
    int art_begin_ = 0;
    int n_art_ = 0;
    int n_cols_ = 0;
    std::vector<Row> rows_;
    std::vector<int> basis_;
    std::vector<std::vector<double>> T_;
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp) {
    detail::check_program(lp);
    const int n = lp.vars();
    const auto lower_of = [&](int i) {
        return lp.lower.empty() ? 0.0 : lp.lower[static_cast<std::size_t>(i)];
    };
    const auto upper_of = [&](int i) {
        return lp.upper.empty() ? kLpInfinity : lp.upper[static_cast<std::size_t>(i)];
    };
    for (int i = 0; i < n; ++i) {
        if (upper_of(i) < lower_of(i)) return {LpStatus::Infeasible, {}, 0.0};
    }

    // Work in shifted variables x = z - lower, x >= 0.
    detail::SimplexTableau tab(n);
    for (std::size_t r = 0; r < lp.ge_lhs.size(); ++r) {
        double shift = 0.0;
        for (int i = 0; i < n; ++i) shift += lp.ge_lhs[r][static_cast<std::size_t>(i)] * lower_of(i);
        tab.add_row(lp.ge_lhs[r], lp.ge_rhs[r] - shift, +1);
    }
    for (std::size_t r = 0; r < lp.eq_lhs.size(); ++r) {
        double shift = 0.0;
        for (int i = 0; i < n; ++i) shift += lp.eq_lhs[r][static_cast<std::size_t>(i)] * lower_of(i);
        tab.add_row(lp.eq_lhs[r], lp.eq_rhs[r] - shift, 0);
    }
    for (int i = 0; i < n; ++i) {
        if (upper_of(i) == kLpInfinity) continue;
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        row[static_cast<std::size_t>(i)] = 1.0;
        tab.add_row(std::move(row), upper_of(i) - lower_of(i), -1);
    }

    std::vector<double> x;
    const LpStatus st = tab.run(lp.objective, x);
    LpSolution sol;
    sol.status = st;
    if (st == LpStatus::Optimal) {
        sol.z.resize(static_cast<std::size_t>(n));
        sol.objective_value = 0.0;
        for (int i = 0; i < n; ++i) {
            sol.z[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + lower_of(i);
            sol.objective_value += lp.objective[static_cast<std::size_t>(i)] * sol.z[static_cast<std::size_t>(i)];
        }
    }
    return sol;
}

/// Max constraint violation of a candidate point, for checking solutions.
inline double feasibility_residual(const LinearProgram& lp, std::span<const double> z) {
    double worst = 0.0;
    for (std::size_t r = 0; r < lp.ge_lhs.size(); ++r) {
        double v = 0.0;
        for (int i = 0; i < lp.vars(); ++i) v += lp.ge_lhs[r][static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        worst = std::max(worst, lp.ge_rhs[r] - v);
    }
    for (std::size_t r = 0; r < lp.eq_lhs.size(); ++r) {
        double v = 0.0;
        for (int i = 0; i < lp.vars(); ++i) v += lp.eq_lhs[r][static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        worst = std::max(worst, std::abs(v - lp.eq_rhs[r]));
    }
    for (int i = 0; i < lp.vars(); ++i) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[static_cast<std::size_t>(i)];
        const double hi = lp.upper.empty() ? kLpInfinity : lp.upper[static_cast<std::size_t>(i)];
        worst = std::max(worst, lo - z[static_cast<std::size_t>(i)]);
        if (hi != kLpInfinity) worst = std::max(worst, z[static_cast<std::size_t>(i)] - hi);
    }
    return worst;
}

}  // namespace envyfree
