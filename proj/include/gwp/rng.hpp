#pragma once

#include "gwp/dists.hpp"

#include <cstdint>
#include <random>

namespace gwp {

// splitmix64 output function; stateless counter-based mixing.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed for the stream at position `index` under `master`. Streams are the
// splitmix64 sequence evaluated at the counter, so derivation is
// order-independent and replicates can run in parallel.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master + 0x9E3779B97F4A7C15ull * (index + 1)));
}

// Private RNG stream for one replicate. Normal draws use the inverse-CDF
// so the sequence depends only on the engine, not on library internals.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    static RandomStream derived(std::uint64_t master, std::uint64_t index) {
        return RandomStream(stream_seed(master, index));
    }

    // Uniform on (0,1), 53-bit resolution, endpoints excluded.
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return norm_quantile(uniform()); }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace gwp
