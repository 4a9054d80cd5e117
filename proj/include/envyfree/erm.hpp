#pragma once

// Loss-minimizing envy-free classifiers on a sample. The randomized problem
// is a linear program over per-individual outcome distributions; the
// deterministic problem is solved by exhaustive enumeration; mixtures of
// fixed deterministic components reduce to a small LP over the weights.

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "envyfree/core.hpp"
#include "envyfree/lp.hpp"

namespace envyfree {

enum class ErmStatus { Optimal, Infeasible };

struct ErmResult {
    RandomizedAssignment assignment;
    double loss = 0.0;  // mean expected loss over the sample
    ErmStatus status = ErmStatus::Optimal;
};

namespace detail {

inline std::vector<std::vector<double>> evaluate_table(const UtilityModel& model,
                                                       std::span<const Individual> S,
                                                       int k) {
    std::vector<std::vector<double>> t(S.size(), std::vector<double>(static_cast<std::size_t>(k)));
    for (std::size_t i = 0; i < S.size(); ++i)
        for (int y = 0; y < k; ++y) t[i][static_cast<std::size_t>(y)] = model(S[i], y);
    return t;
}

inline RandomizedAssignment assignment_from_rows(std::span<const Individual> S,
                                                 std::span<const double> flat, int k) {
    RandomizedAssignment a;
    a.sample.assign(S.begin(), S.end());
    a.rows.reserve(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        std::vector<double> row(flat.begin() + static_cast<std::ptrdiff_t>(i) * k,
                                flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * k);
        double sum = 0.0;
        for (auto& v : row) {
            if (v < 0.0) v = 0.0;  // clear solver noise
            sum += v;
        }
        if (sum <= 0.0) throw std::logic_error("erm: degenerate LP row");
        for (auto& v : row) v /= sum;
        a.rows.emplace_back(std::move(row));
    }
    return a;
}

}  // namespace detail

/// Minimum-mean-loss randomized classifier that is envy free on S. Always
/// feasible: assigning every individual a point mass on his favorite outcome
/// satisfies every envy constraint, so the status is always Optimal.
inline ErmResult solve_randomized_ef_erm(std::span<const Individual> S,
                                         const UtilityModel& u, const LossModel& loss,
                                         OutcomeSpace outcomes) {
    if (S.empty()) throw std::invalid_argument("solve_randomized_ef_erm: empty sample");
    const int n = static_cast<int>(S.size());
    const int k = outcomes.k;
    const auto util = detail::evaluate_table(u, S, k);
    const auto cost = detail::evaluate_table(loss, S, k);

    // Variables p[i*k + y]: probability that individual i receives outcome y.
    LinearProgram lp;
    lp.objective.assign(static_cast<std::size_t>(n) * k, 0.0);
    for (int i = 0; i < n; ++i)
        for (int y = 0; y < k; ++y)
            lp.objective[static_cast<std::size_t>(i) * k + y] =
                cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] / n;
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(static_cast<std::size_t>(n) * k, 0.0);
        for (int y = 0; y < k; ++y) row[static_cast<std::size_t>(i) * k + y] = 1.0;
        lp.eq_lhs.push_back(std::move(row));
        lp.eq_rhs.push_back(1.0);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            // i must like his own row at least as much as j's row.
            std::vector<double> row(static_cast<std::size_t>(n) * k, 0.0);
            for (int y = 0; y < k; ++y) {
                row[static_cast<std::size_t>(i) * k + y] += util[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)];
                row[static_cast<std::size_t>(j) * k + y] -= util[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)];
            }
            lp.ge_lhs.push_back(std::move(row));
            lp.ge_rhs.push_back(0.0);
        }
    }

    const LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::logic_error("solve_randomized_ef_erm: LP reported " +
                               std::string(sol.status == LpStatus::Infeasible ? "infeasible" : "unbounded") +
                               " on n=" + std::to_string(n) + " k=" + std::to_string(k));
    ErmResult out;
    out.assignment = detail::assignment_from_rows(S, sol.z, k);
    out.status = ErmStatus::Optimal;
    double total = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i)
        total += expected_loss(loss, S[i], out.assignment.rows[i]);
    out.loss = total / n;
    return out;
}

/// Exhaustive search over all k^n deterministic assignments, keeping the
/// first minimum-loss assignment (in lexicographic order) that is envy free.
/// The favorite assignment is always a survivor, so the search never comes
/// back empty.
inline ErmResult solve_deterministic_ef_erm(std::span<const Individual> S,
                                            const UtilityModel& u, const LossModel& loss,
                                            OutcomeSpace outcomes,
                                            long long assignment_budget = 10'000'000) {
    if (S.empty()) throw std::invalid_argument("solve_deterministic_ef_erm: empty sample");
    const int n = static_cast<int>(S.size());
    const int k = outcomes.k;
    double combos = 1.0;
    for (int i = 0; i < n; ++i) combos *= k;
    if (combos > static_cast<double>(assignment_budget))
        throw BudgetError("solve_deterministic_ef_erm: k^n = " + std::to_string(combos) +
                          " exceeds budget " + std::to_string(assignment_budget));
    const auto util = detail::evaluate_table(u, S, k);
    const auto cost = detail::evaluate_table(loss, S, k);

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<int> best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<char> used(static_cast<std::size_t>(k));
    for (;;) {
        std::fill(used.begin(), used.end(), 0);
        for (int i = 0; i < n; ++i) used[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] = 1;
        bool ef = true;
        for (int i = 0; i < n && ef; ++i) {
            const double own = util[static_cast<std::size_t>(i)][static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            for (int y = 0; y < k; ++y) {
                if (used[static_cast<std::size_t>(y)] &&
                    util[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] > own + kEnvyStrictnessGuard) {
                    ef = false;
                    break;
                }
            }
        }
        if (ef) {
            double total = 0.0;
            for (int i = 0; i < n; ++i)
                total += cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            if (total < best_loss) {
                best_loss = total;
                best = assign;
            }
        }
        int pos = n - 1;
        while (pos >= 0 && assign[static_cast<std::size_t>(pos)] == k - 1) {
            assign[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++assign[static_cast<std::size_t>(pos)];
    }

    ErmResult out;
    out.assignment.sample.assign(S.begin(), S.end());
    for (int i = 0; i < n; ++i)
        out.assignment.rows.push_back(OutcomeDistribution::point_mass(k, best[static_cast<std::size_t>(i)]));
    out.loss = best_loss / n;
    out.status = ErmStatus::Optimal;
    return out;
}

struct MixtureWeights {
    std::vector<double> weights;
    double loss = std::numeric_limits<double>::quiet_NaN();
    ErmStatus status = ErmStatus::Infeasible;
};

/// Best envy-free mixing weights over fixed deterministic components. The
/// components cannot change, so infeasibility is a real outcome here.
///
/// The envy constraint for an ordered pair (i, i') only depends on the label
/// profile (g_1(x_i'), ..., g_m(x_i')), so constraints are deduplicated by
/// profile and then reduced to the componentwise-minimal rows; both steps are
/// exact. This keeps the LP tiny even for samples with thousands of
/// individuals.
inline MixtureWeights optimize_mixture_weights(const std::vector<DeterministicClassifier>& components,
                                               std::span<const Individual> S,
                                               const UtilityModel& u, const LossModel& loss) {
    if (components.empty()) throw std::invalid_argument("optimize_mixture_weights: no components");
    if (S.empty()) throw std::invalid_argument("optimize_mixture_weights: empty sample");
    const int m = static_cast<int>(components.size());
    const int n = static_cast<int>(S.size());
    const int k = u.outcomes();

    std::vector<std::vector<int>> labels(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        labels[static_cast<std::size_t>(j)].resize(S.size());
        for (std::size_t i = 0; i < S.size(); ++i) {
            const int y = components[static_cast<std::size_t>(j)](S[i]);
            if (y < 0 || y >= k)
                throw std::invalid_argument("optimize_mixture_weights: component label out of range");
            labels[static_cast<std::size_t>(j)][i] = y;
        }
    }

    std::vector<double> objective(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < S.size(); ++i)
            total += loss(S[i], labels[static_cast<std::size_t>(j)][i]);
        objective[static_cast<std::size_t>(j)] = total / n;
    }

    // Distinct label profiles across the sample.
    std::map<std::vector<int>, int> profile_index;
    std::vector<std::vector<int>> profiles;
    std::vector<int> profile_of(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        std::vector<int> prof(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) prof[static_cast<std::size_t>(j)] = labels[static_cast<std::size_t>(j)][i];
        auto [it, inserted] = profile_index.emplace(prof, static_cast<int>(profiles.size()));
        if (inserted) profiles.push_back(prof);
        profile_of[i] = it->second;
    }

    // Candidate rows a with the meaning a . alpha >= 0.
    std::vector<std::vector<double>> kept;
    auto add_row = [&kept, m](const std::vector<double>& row) {
        bool vacuous = true;
        for (double v : row)
            if (v < 0.0) vacuous = false;
        if (vacuous) return;  // alpha >= 0 already implies it
        for (const auto& other : kept) {
            bool dominated = true;
            for (int j = 0; j < m; ++j)
                if (other[static_cast<std::size_t>(j)] > row[static_cast<std::size_t>(j)]) {
                    dominated = false;
                    break;
                }
            if (dominated) return;  // an existing row is at least as tight
        }
        std::erase_if(kept, [&row, m](const std::vector<double>& other) {
            for (int j = 0; j < m; ++j)
                if (row[static_cast<std::size_t>(j)] > other[static_cast<std::size_t>(j)]) return false;
            return true;
        });
        kept.push_back(row);
    };

    std::vector<double> utail(static_cast<std::size_t>(k));
    std::vector<double> row(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < S.size(); ++i) {
        for (int y = 0; y < k; ++y) utail[static_cast<std::size_t>(y)] = u(S[i], y);
        const auto& own = profiles[static_cast<std::size_t>(profile_of[i])];
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            if (static_cast<int>(p) == profile_of[i]) continue;
            const auto& other = profiles[p];
            for (int j = 0; j < m; ++j)
                row[static_cast<std::size_t>(j)] =
                    utail[static_cast<std::size_t>(own[static_cast<std::size_t>(j)])] -
                    utail[static_cast<std::size_t>(other[static_cast<std::size_t>(j)])];
            add_row(row);
        }
    }

    LinearProgram lp;
    lp.objective = objective;
    for (auto& r : kept) {
        lp.ge_lhs.push_back(std::move(r));
        lp.ge_rhs.push_back(0.0);
    }
    lp.eq_lhs.emplace_back(static_cast<std::size_t>(m), 1.0);
    lp.eq_rhs.push_back(1.0);

    const LpSolution sol = solve(lp);
    MixtureWeights out;
    if (sol.status == LpStatus::Infeasible) {
        out.status = ErmStatus::Infeasible;
        return out;
    }
    if (sol.status != LpStatus::Optimal)
        throw std::logic_error("optimize_mixture_weights: LP reported unbounded");
    out.weights = sol.z;
    double sum = 0.0;
    for (auto& w : out.weights) {
        if (w < 0.0) w = 0.0;
        sum += w;
    }
    for (auto& w : out.weights) w /= sum;
    out.loss = 0.0;
    for (int j = 0; j < m; ++j) out.loss += out.weights[static_cast<std::size_t>(j)] * objective[static_cast<std::size_t>(j)];
    out.status = ErmStatus::Optimal;
    return out;
}

}  // namespace envyfree
