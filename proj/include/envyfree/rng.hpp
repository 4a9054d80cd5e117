#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace envyfree {

// SplitMix64 finalizer. Bijective on 64-bit words with full avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent child seed from (seed, tag, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
    return mix64(mix64(mix64(seed) + tag) + index);
}

// Counter-based random stream: draw i of stream (seed, stream_id) depends only
// on the key and the counter, never on other streams. Results are therefore
// identical no matter how work is split across threads or reordered.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(mix64(mix64(seed) + stream_id)) {}

    std::uint64_t next_u64() { return mix64(key_ + counter_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t next_index(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("next_index: bound must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Choose `count` distinct indices from [0, population) by partial
/// Fisher-Yates. Order of the result is the draw order.
inline std::vector<int> sample_without_replacement(int population, int count,
                                                   RngStream& rng) {
    if (count < 0 || count > population)
        throw std::invalid_argument("sample_without_replacement: bad count");
    std::vector<int> idx(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.next_index(
                               static_cast<std::uint64_t>(population - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

}  // namespace envyfree
