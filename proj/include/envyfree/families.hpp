#pragma once

// Deterministic classifier families and the combinatorial tools used to
// reason about them: restrictions to a sample, brute-force multi-class
// shattering dimension, pairing into a product family, simplex weight
// covers, and mixture fitting against a component pool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "envyfree/core.hpp"
#include "envyfree/erm.hpp"
#include "envyfree/rng.hpp"

namespace envyfree {

struct FeatureMap {
    std::string name;
    int dim = 0;
    std::function<std::vector<double>(const Individual&, int)> eval;
};

/// psi(x, y) = e_y (x) x : one block of the raw features per outcome.
inline FeatureMap onehot_linear_feature_map(int k, int feature_dim) {
    FeatureMap fm;
    fm.name = "onehot-linear";
    fm.dim = k * feature_dim;
    fm.eval = [k, feature_dim](const Individual& x, int y) {
        if (static_cast<int>(x.features.size()) != feature_dim)
            throw std::invalid_argument("feature map: feature dimension mismatch");
        std::vector<double> out(static_cast<std::size_t>(k) * feature_dim, 0.0);
        for (int i = 0; i < feature_dim; ++i)
            out[static_cast<std::size_t>(y) * feature_dim + i] = x.features[static_cast<std::size_t>(i)];
        return out;
    };
    return fm;
}

/// psi(x, y) = e_y (x) [x; 1] : per-outcome affine block.
inline FeatureMap onehot_affine_feature_map(int k, int feature_dim) {
    FeatureMap fm;
    fm.name = "onehot-affine";
    fm.dim = k * (feature_dim + 1);
    fm.eval = [k, feature_dim](const Individual& x, int y) {
        if (static_cast<int>(x.features.size()) != feature_dim)
            throw std::invalid_argument("feature map: feature dimension mismatch");
        std::vector<double> out(static_cast<std::size_t>(k) * (feature_dim + 1), 0.0);
        const std::size_t base = static_cast<std::size_t>(y) * (feature_dim + 1);
        for (int i = 0; i < feature_dim; ++i) out[base + i] = x.features[static_cast<std::size_t>(i)];
        out[base + feature_dim] = 1.0;
        return out;
    };
    return fm;
}

inline FeatureMap feature_map_by_name(const std::string& name, int k, int feature_dim) {
    if (name == "onehot-linear") return onehot_linear_feature_map(k, feature_dim);
    if (name == "onehot-affine") return onehot_affine_feature_map(k, feature_dim);
    throw std::invalid_argument("unknown feature map '" + name + "'");
}

/// g(x) = argmax_y w . psi(x, y), ties broken toward the smallest outcome.
struct LinearArgmaxClassifier {
    std::vector<double> weights;
    FeatureMap feature_map;
    int k = 2;

    int operator()(const Individual& x) const {
        if (static_cast<int>(weights.size()) != feature_map.dim)
            throw std::invalid_argument("LinearArgmaxClassifier: weight/feature-map dim mismatch");
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int y = 0; y < k; ++y) {
            const auto phi = feature_map.eval(x, y);
            double score = 0.0;
            for (std::size_t i = 0; i < phi.size(); ++i) score += weights[i] * phi[i];
            if (score > best_score) {
                best_score = score;
                best = y;
            }
        }
        return best;
    }
};

/// Random mixture of deterministic components: the classifier picks
/// component j with probability weights[j] and returns its label.
struct MixtureClassifier {
    std::vector<DeterministicClassifier> components;
    std::vector<double> weights;
    int k = 2;

    OutcomeDistribution distribution(const Individual& x) const {
        if (components.empty() || components.size() != weights.size())
            throw std::invalid_argument("MixtureClassifier: component/weight mismatch");
        std::vector<double> probs(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < components.size(); ++j) {
            const int y = components[j](x);
            if (y < 0 || y >= k)
                throw std::invalid_argument("MixtureClassifier: component label out of range");
            probs[static_cast<std::size_t>(y)] += weights[j];
        }
        return OutcomeDistribution(std::move(probs));
    }

    OutcomeDistribution operator()(const Individual& x) const { return distribution(x); }
};

inline OutcomeDistribution mixture_distribution(const MixtureClassifier& h, const Individual& x) {
    return h.distribution(x);
}

/// Explicit finite family over a finite working domain.
struct FiniteFamily {
    std::vector<DeterministicClassifier> members;
    std::vector<Individual> domain;
    int k = 2;
};

/// Distinct label vectors realized on S by members of G, sorted.
inline std::vector<std::vector<int>> restrict_family(const FiniteFamily& G,
                                                     std::span<const Individual> S) {
    if (G.members.empty()) throw std::invalid_argument("restrict_family: empty family");
    if (S.empty()) throw std::invalid_argument("restrict_family: empty sample");
    std::vector<std::vector<int>> labelings;
    labelings.reserve(G.members.size());
    for (const auto& g : G.members) {
        std::vector<int> row(S.size());
        for (std::size_t i = 0; i < S.size(); ++i) row[i] = g(S[i]);
        labelings.push_back(std::move(row));
    }
    std::sort(labelings.begin(), labelings.end());
    labelings.erase(std::unique(labelings.begin(), labelings.end()), labelings.end());
    return labelings;
}

namespace detail {

using LabelCode = unsigned __int128;

inline LabelCode encode_labels(const std::vector<int>& row, std::span<const int> subset, int k) {
    LabelCode code = 0;
    for (int idx : subset) code = code * static_cast<unsigned>(k) + static_cast<unsigned>(row[static_cast<std::size_t>(idx)]);
    return code;
}

// A subset is multi-class shattered when two label vectors that disagree on
// every chosen point span a full combinatorial cube inside the realized
// labelings. Every shattering witness contains such an antipodal vertex
// pair, so scanning pairs is exhaustive.
inline bool subset_shattered(const std::vector<std::vector<int>>& labelings,
                             std::span<const int> subset, int k) {
    const int n = static_cast<int>(subset.size());
    std::vector<std::vector<int>> proj;
    proj.reserve(labelings.size());
    for (const auto& row : labelings) {
        std::vector<int> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(subset[static_cast<std::size_t>(i)])];
        proj.push_back(std::move(p));
    }
    std::sort(proj.begin(), proj.end());
    proj.erase(std::unique(proj.begin(), proj.end()), proj.end());
    const std::uint64_t need = std::uint64_t{1} << n;
    if (proj.size() < need) return false;
    std::vector<LabelCode> codes;
    codes.reserve(proj.size());
    std::vector<int> identity(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) identity[static_cast<std::size_t>(i)] = i;
    for (const auto& p : proj) codes.push_back(encode_labels(p, identity, k));
    std::sort(codes.begin(), codes.end());

    std::vector<int> vertex(static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < proj.size(); ++a) {
        for (std::size_t b = a + 1; b < proj.size(); ++b) {
            bool everywhere = true;
            for (int i = 0; i < n; ++i) {
                if (proj[a][static_cast<std::size_t>(i)] == proj[b][static_cast<std::size_t>(i)]) {
                    everywhere = false;
                    break;
                }
            }
            if (!everywhere) continue;
            bool complete = true;
            for (std::uint64_t mask = 1; mask + 1 < need && complete; ++mask) {
                for (int i = 0; i < n; ++i)
                    vertex[static_cast<std::size_t>(i)] = (mask >> i) & 1
                                                              ? proj[a][static_cast<std::size_t>(i)]
                                                              : proj[b][static_cast<std::size_t>(i)];
                if (!std::binary_search(codes.begin(), codes.end(), encode_labels(vertex, identity, k)))
                    complete = false;
            }
            if (complete) return true;
        }
    }
    return false;
}

inline bool next_combination(std::vector<int>& comb, int n) {
    const int r = static_cast<int>(comb.size());
    int i = r - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) return false;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    return true;
}

}  // namespace detail

/// Exhaustive multi-class shattering dimension of G over its domain.
/// A family needs at least 2^n distinct restrictions to shatter n points,
/// which caps the subset sizes worth searching.
inline int natarajan_dim(const FiniteFamily& G, int max_domain = 20, int max_members = 10'000) {
    if (G.members.empty()) throw std::invalid_argument("natarajan_dim: empty family");
    if (G.domain.empty()) return 0;
    if (static_cast<int>(G.domain.size()) > max_domain ||
        static_cast<int>(G.members.size()) > max_members)
        throw BudgetError("natarajan_dim: domain " + std::to_string(G.domain.size()) +
                          " / members " + std::to_string(G.members.size()) + " over budget");
    const auto labelings = restrict_family(G, G.domain);
    const int points = static_cast<int>(G.domain.size());
    int n_max = 0;
    while (n_max < points && (std::uint64_t{1} << (n_max + 1)) <= labelings.size()) ++n_max;
    for (int n = n_max; n >= 1; --n) {
        std::vector<int> comb(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) comb[static_cast<std::size_t>(i)] = i;
        do {
            if (detail::subset_shattered(labelings, comb, G.k)) return n;
        } while (detail::next_combination(comb, points));
    }
    return 0;
}

/// All ordered pairs of members acting into the product label space Y^2 with
/// (g, g')(x) = g(x) * k + g'(x). Members are not deduplicated.
inline FiniteFamily product_family(const FiniteFamily& G, long long member_budget = 10'000'000) {
    if (G.members.empty()) throw std::invalid_argument("product_family: empty family");
    const long long size = static_cast<long long>(G.members.size());
    if (size * size > member_budget)
        throw BudgetError("product_family: |G|^2 = " + std::to_string(size * size) +
                          " exceeds budget");
    FiniteFamily P;
    P.domain = G.domain;
    P.k = G.k * G.k;
    P.members.reserve(static_cast<std::size_t>(size * size));
    for (const auto& g1 : G.members) {
        for (const auto& g2 : G.members) {
            const int k = G.k;
            P.members.push_back([g1, g2, k](const Individual& x) { return g1(x) * k + g2(x); });
        }
    }
    return P;
}

/// Finite grid on the m-simplex with coordinates that are exact multiples of
/// 1/N, N = ceil(m / gamma). Every weight vector has an L1-neighbor in the
/// grid within gamma.
struct WeightCover {
    int m = 1;
    double gamma = 1.0;
    long long grid_n = 1;
    std::vector<std::vector<double>> points;
};

inline WeightCover build_weight_cover(int m, double gamma, long long point_budget = 10'000'000) {
    if (m < 1) throw std::invalid_argument("build_weight_cover: m must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("build_weight_cover: gamma must be in (0,1]");
    const long long N = static_cast<long long>(std::ceil(static_cast<double>(m) / gamma - 1e-9));
    // |cover| = C(N + m - 1, m - 1)
    double count = 1.0;
    for (int i = 1; i <= m - 1; ++i) count *= static_cast<double>(N + i) / i;
    if (count > static_cast<double>(point_budget))
        throw BudgetError("build_weight_cover: cover size " + std::to_string(count) +
                          " exceeds budget");
    WeightCover cover;
    cover.m = m;
    cover.gamma = gamma;
    cover.grid_n = N;
    std::vector<long long> counts(static_cast<std::size_t>(m), 0);
    std::vector<double> point(static_cast<std::size_t>(m));
    const auto emit = [&]() {
        for (int i = 0; i < m; ++i)
            point[static_cast<std::size_t>(i)] =
                static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(N);
        cover.points.push_back(point);
    };
    // Compositions of N into m parts, lexicographic in the count vector.
    const std::function<void(int, long long)> rec = [&](int pos, long long remaining) {
        if (pos == m - 1) {
            counts[static_cast<std::size_t>(pos)] = remaining;
            emit();
            return;
        }
        for (long long c = 0; c <= remaining; ++c) {
            counts[static_cast<std::size_t>(pos)] = c;
            rec(pos + 1, remaining - c);
        }
    };
    rec(0, N);
    return cover;
}

/// Cover point close to p by largest-remainder rounding; the result is a grid
/// point within gamma/2 of p in L1, comfortably inside the cover guarantee.
inline std::vector<double> nearest_cover_point(const WeightCover& cover, std::span<const double> p) {
    if (static_cast<int>(p.size()) != cover.m)
        throw std::invalid_argument("nearest_cover_point: dimension mismatch");
    const long long N = cover.grid_n;
    std::vector<long long> counts(p.size());
    std::vector<std::pair<double, int>> remainders(p.size());
    long long total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double scaled = p[i] * static_cast<double>(N);
        counts[i] = static_cast<long long>(std::floor(scaled));
        remainders[i] = {scaled - static_cast<double>(counts[i]), static_cast<int>(i)};
        total += counts[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (long long give = N - total, j = 0; give > 0; --give, ++j)
        ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(j)].second)];
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        out[i] = static_cast<double>(counts[i]) / static_cast<double>(N);
    return out;
}

struct FitMixtureResult {
    MixtureClassifier mixture;
    double loss = 0.0;
    bool favorite_added = false;  // pool had to be augmented to reach feasibility
};

/// Random-restart search for the best envy-free mixture of m pool components.
/// Each restart samples components (without replacement when the pool allows)
/// and optimizes the weights; the lowest-loss feasible restart wins, ties to
/// the earliest restart. If every restart is infeasible, the pool is augmented
/// with the favorite-outcome classifier, which makes weight vector (1,0,...)
/// feasible, and the restarts are repeated with it pinned in.
inline FitMixtureResult fit_ef_mixture(const std::vector<DeterministicClassifier>& pool, int m,
                                       std::span<const Individual> S, const UtilityModel& u,
                                       const LossModel& loss, std::uint64_t seed, int restarts) {
    if (pool.empty()) throw std::invalid_argument("fit_ef_mixture: empty pool");
    if (m < 1) throw std::invalid_argument("fit_ef_mixture: m must be >= 1");
    if (restarts < 1) throw std::invalid_argument("fit_ef_mixture: restarts must be >= 1");

    const auto pick = [&pool](int count, RngStream& rng) {
        std::vector<DeterministicClassifier> comps;
        comps.reserve(static_cast<std::size_t>(count));
        if (count <= static_cast<int>(pool.size())) {
            for (int idx : sample_without_replacement(static_cast<int>(pool.size()), count, rng))
                comps.push_back(pool[static_cast<std::size_t>(idx)]);
        } else {
            for (int i = 0; i < count; ++i)
                comps.push_back(pool[rng.next_index(pool.size())]);
        }
        return comps;
    };

    std::optional<FitMixtureResult> best;
    const auto consider = [&](std::vector<DeterministicClassifier> comps, bool augmented) {
        auto mw = optimize_mixture_weights(comps, S, u, loss);
        if (mw.status != ErmStatus::Optimal) return;
        if (!best || mw.loss < best->loss) {
            FitMixtureResult r;
            r.mixture = MixtureClassifier{std::move(comps), std::move(mw.weights), u.outcomes()};
            r.loss = mw.loss;
            r.favorite_added = augmented;
            best = std::move(r);
        }
    };

    for (int r = 0; r < restarts; ++r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        consider(pick(m, rng), false);
    }
    if (!best) {
        const UtilityModel u_copy = u;
        DeterministicClassifier favorite = [u_copy](const Individual& x) {
            return favorite_outcome(u_copy, x);
        };
        for (int r = 0; r < restarts; ++r) {
            RngStream rng(seed, 0x100000 + static_cast<std::uint64_t>(r));
            auto comps = pick(m - 1, rng);
            comps.push_back(favorite);
            consider(std::move(comps), true);
        }
    }
    return *best;
}

}  // namespace envyfree
