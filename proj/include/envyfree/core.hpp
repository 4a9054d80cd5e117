#pragma once

// Domain types for envy-free classification: individuals, outcome
// distributions, utility/loss models, randomized assignments, and the
// envy predicates and estimators built on top of them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "envyfree/rng.hpp"

namespace envyfree {

// A measured envy gap must exceed the threshold by this much before it counts
// as a violation, so exact ties never register as envy.
inline constexpr double kEnvyStrictnessGuard = 1e-12;

inline constexpr double kDistributionSumTol = 1e-9;

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Individual {
    int id = 0;
    std::vector<double> features;
};

/// Finite outcome space with labels 0..k-1.
struct OutcomeSpace {
    int k = 1;
};

class OutcomeDistribution {
public:
    OutcomeDistribution() = default;

    explicit OutcomeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty())
            throw std::invalid_argument("OutcomeDistribution: empty probability vector");
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("OutcomeDistribution: negative or non-finite entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kDistributionSumTol)
            throw std::invalid_argument("OutcomeDistribution: entries sum to " + std::to_string(sum));
    }

    static OutcomeDistribution point_mass(int k, int outcome) {
        std::vector<double> p(static_cast<std::size_t>(k), 0.0);
        p.at(static_cast<std::size_t>(outcome)) = 1.0;
        return OutcomeDistribution(std::move(p));
    }

    static OutcomeDistribution uniform(int k) {
        std::vector<double> p(static_cast<std::size_t>(k), 1.0 / k);
        return OutcomeDistribution(std::move(p));
    }

    double operator[](int y) const { return probs_[static_cast<std::size_t>(y)]; }
    int size() const { return static_cast<int>(probs_.size()); }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
};

// Evaluable map (individual, outcome) -> [0,1]. Three representations: a
// dense per-id table, a clamped affine function of the features, or an
// arbitrary callable (used by the grid construction).
class UtilityModel {
public:
    enum class Kind { Table, LinearFeature, Grid };

    static UtilityModel table(std::vector<int> ids, std::vector<std::vector<double>> values) {
        if (ids.size() != values.size())
            throw std::invalid_argument("UtilityModel::table: ids/values size mismatch");
        if (values.empty() || values.front().empty())
            throw std::invalid_argument("UtilityModel::table: empty table");
        TableRep rep;
        rep.k = static_cast<int>(values.front().size());
        rep.values = std::move(values);
        for (const auto& row : rep.values) {
            if (static_cast<int>(row.size()) != rep.k)
                throw std::invalid_argument("UtilityModel::table: ragged rows");
            for (double v : row)
                if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                    throw std::invalid_argument("UtilityModel::table: value outside [0,1]");
        }
        for (std::size_t r = 0; r < ids.size(); ++r) {
            if (!rep.row_of_id.emplace(ids[r], r).second)
                throw std::invalid_argument("UtilityModel::table: duplicate id");
        }
        UtilityModel m;
        m.rep_ = std::move(rep);
        return m;
    }

    /// Per-outcome affine map w_y . features + b_y, clamped into [0,1].
    static UtilityModel linear_feature(std::vector<std::vector<double>> weights,
                                       std::vector<double> bias) {
        if (weights.empty() || weights.size() != bias.size())
            throw std::invalid_argument("UtilityModel::linear_feature: weights/bias mismatch");
        for (const auto& w : weights)
            for (double v : w)
                if (!std::isfinite(v))
                    throw std::invalid_argument("UtilityModel::linear_feature: non-finite weight");
        LinearRep rep{std::move(weights), std::move(bias)};
        UtilityModel m;
        m.rep_ = std::move(rep);
        return m;
    }

    static UtilityModel grid(int k, std::function<double(const Individual&, int)> eval) {
        if (k < 1 || !eval) throw std::invalid_argument("UtilityModel::grid: bad arguments");
        UtilityModel m;
        m.rep_ = GridRep{k, std::move(eval)};
        return m;
    }

    Kind kind() const {
        if (std::holds_alternative<TableRep>(rep_)) return Kind::Table;
        if (std::holds_alternative<LinearRep>(rep_)) return Kind::LinearFeature;
        return Kind::Grid;
    }

    int outcomes() const {
        if (const auto* t = std::get_if<TableRep>(&rep_)) return t->k;
        if (const auto* l = std::get_if<LinearRep>(&rep_)) return static_cast<int>(l->weights.size());
        return std::get<GridRep>(rep_).k;
    }

    double operator()(const Individual& x, int y) const {
        if (y < 0 || y >= outcomes())
            throw std::invalid_argument("UtilityModel: outcome out of range");
        if (const auto* t = std::get_if<TableRep>(&rep_)) {
            const auto it = t->row_of_id.find(x.id);
            if (it == t->row_of_id.end())
                throw std::invalid_argument("UtilityModel: unknown individual id " + std::to_string(x.id));
            return t->values[it->second][static_cast<std::size_t>(y)];
        }
        if (const auto* l = std::get_if<LinearRep>(&rep_)) {
            const auto& w = l->weights[static_cast<std::size_t>(y)];
            if (w.size() != x.features.size())
                throw std::invalid_argument("UtilityModel: feature dimension mismatch");
            double v = l->bias[static_cast<std::size_t>(y)];
            for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * x.features[i];
            return std::clamp(v, 0.0, 1.0);
        }
        return std::get<GridRep>(rep_)(x, y);
    }

private:
    struct TableRep {
        int k = 0;
        std::vector<std::vector<double>> values;
        std::unordered_map<int, std::size_t> row_of_id;
    };
    struct LinearRep {
        std::vector<std::vector<double>> weights;
        std::vector<double> bias;
    };
    struct GridRep {
        int k = 0;
        std::function<double(const Individual&, int)> eval;
        double operator()(const Individual& x, int y) const { return eval(x, y); }
    };

    std::variant<TableRep, LinearRep, GridRep> rep_;
};

// Loss models share the representations and the [0,1] range requirement.
using LossModel = UtilityModel;

/// Randomized classifier on a fixed sample: one outcome distribution per
/// individual.
struct RandomizedAssignment {
    std::vector<Individual> sample;
    std::vector<OutcomeDistribution> rows;

    void check_valid() const {
        if (sample.empty())
            throw std::invalid_argument("RandomizedAssignment: empty sample");
        if (sample.size() != rows.size())
            throw std::invalid_argument("RandomizedAssignment: sample/rows size mismatch");
    }
};

struct EnvyReport {
    double beta = 0.0;
    double alpha_hat = 0.0;       // fraction of ordered pairs violating
    double worst_gap = 0.0;       // max over pairs of u(x, h(x')) - u(x, h(x))
    long long n_pairs = 0;
    bool exact = true;            // full enumeration vs Monte Carlo
    double ci_halfwidth = 0.0;    // Hoeffding half-width; 0 when exact
};

// Type-erased classifier handles. Templates are used where evaluation is hot.
using ClassifierFn = std::function<OutcomeDistribution(const Individual&)>;
using DeterministicClassifier = std::function<int(const Individual&)>;

inline double expected_utility(const UtilityModel& u, const Individual& x,
                               const OutcomeDistribution& p) {
    if (p.size() != u.outcomes())
        throw std::invalid_argument("expected_utility: distribution/outcome-space mismatch");
    double acc = 0.0;
    for (int y = 0; y < p.size(); ++y) acc += p[y] * u(x, y);
    return acc;
}

inline double expected_loss(const LossModel& loss, const Individual& x,
                            const OutcomeDistribution& p) {
    return expected_utility(loss, x, p);
}

/// Smallest outcome maximizing u(x, .). Assigning everyone their favorite is
/// always envy free, which makes this the universal feasibility fallback.
inline int favorite_outcome(const UtilityModel& u, const Individual& x) {
    int best = 0;
    double best_v = u(x, 0);
    for (int y = 1; y < u.outcomes(); ++y) {
        const double v = u(x, y);
        if (v > best_v) {
            best_v = v;
            best = y;
        }
    }
    return best;
}

inline DeterministicClassifier favorite_classifier_fn(const UtilityModel& u) {
    return [&u](const Individual& x) { return favorite_outcome(u, x); };
}

/// True iff no individual prefers another row over his own by more than tol.
inline bool is_ef_on_sample(const RandomizedAssignment& h, const UtilityModel& u,
                            double tol) {
    h.check_valid();
    if (tol < 0.0) throw std::invalid_argument("is_ef_on_sample: tol must be >= 0");
    const std::size_t n = h.sample.size();
    std::vector<double> own(n);
    for (std::size_t i = 0; i < n; ++i)
        own[i] = expected_utility(u, h.sample[i], h.rows[i]);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (expected_utility(u, h.sample[i], h.rows[j]) > own[i] + tol) return false;
        }
    }
    return true;
}

/// Exact envy rate of classifier h over an explicit list of ordered pairs.
template <class Classifier>
EnvyReport pairwise_ef_rate(Classifier&& h,
                            std::span<const std::pair<Individual, Individual>> pairs,
                            const UtilityModel& u, double beta) {
    if (pairs.empty()) throw std::invalid_argument("pairwise_ef_rate: no pairs");
    if (beta < 0.0) throw std::invalid_argument("pairwise_ef_rate: beta must be >= 0");
    long long violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [x, other] : pairs) {
        const double own = expected_utility(u, x, h(x));
        const double cross = expected_utility(u, x, h(other));
        const double gap = cross - own;
        worst = std::max(worst, gap);
        if (gap > beta + kEnvyStrictnessGuard) ++violations;
    }
    EnvyReport r;
    r.beta = beta;
    r.alpha_hat = static_cast<double>(violations) / static_cast<double>(pairs.size());
    r.worst_gap = worst;
    r.n_pairs = static_cast<long long>(pairs.size());
    r.exact = true;
    r.ci_halfwidth = 0.0;
    return r;
}

/// Monte Carlo envy rate over n_pairs ordered pairs drawn i.i.d. from the
/// sampler. Pair i consumes only stream (seed, i), so the estimate does not
/// depend on evaluation order. ci_halfwidth is the two-sided Hoeffding bound
/// at confidence 1 - delta.
template <class Classifier, class Sampler>
EnvyReport estimate_ef(Classifier&& h, Sampler&& draw, const UtilityModel& u,
                       double beta, long long n_pairs, std::uint64_t seed,
                       double delta) {
    if (n_pairs < 1) throw std::invalid_argument("estimate_ef: n_pairs must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("estimate_ef: delta must be in (0,1)");
    if (beta < 0.0) throw std::invalid_argument("estimate_ef: beta must be >= 0");
    long long violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (long long i = 0; i < n_pairs; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const Individual x = draw(rng);
        const Individual other = draw(rng);
        const double own = expected_utility(u, x, h(x));
        const double cross = expected_utility(u, x, h(other));
        const double gap = cross - own;
        worst = std::max(worst, gap);
        if (gap > beta + kEnvyStrictnessGuard) ++violations;
    }
    EnvyReport r;
    r.beta = beta;
    r.alpha_hat = static_cast<double>(violations) / static_cast<double>(n_pairs);
    r.worst_gap = worst;
    r.n_pairs = n_pairs;
    r.exact = false;
    r.ci_halfwidth = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n_pairs)));
    return r;
}

}  // namespace envyfree
