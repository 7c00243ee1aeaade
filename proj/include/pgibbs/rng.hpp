#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace pgibbs {

// splitmix64 step; used to expand a master seed into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

// Counter-based seed splitting: stream k of a master seed is seeded with
// splitmix64(master xor splitmix64(k+1)). Streams are reproducible and
// independent of how many streams run in parallel.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t counter) {
    return Rng(splitmix64(master_seed ^ splitmix64(counter + 1)));
}

// Uniform double in [0,1). Implemented directly from the raw 64-bit draw so
// output does not depend on the standard library's distribution internals.
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection from the top of the 64-bit range.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

// Sample an index from an (unnormalized is fine) non-negative weight vector
// by inverse CDF on a single uniform draw.
inline Eigen::Index sample_discrete(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("sample_discrete: no positive weight");
    double u = uniform_real(rng) * total;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    return weights.size() - 1;  // guard against rounding at the right edge
}

}  // namespace pgibbs
