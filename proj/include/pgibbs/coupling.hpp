#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/measures.hpp"
#include "pgibbs/rng.hpp"

namespace pgibbs {

// One step of the greedy Markovian coupling of two copies of K: with
// probability delta = 1 - TV(K(x,.), K(y,.)) both chains move to a common
// draw from the overlap measure min(K(x,.),K(y,.))/delta; otherwise they move
// independently through the normalized positive parts of the row difference.
// Marginals are exactly K(x,.) and K(y,.); equal inputs stay equal.
std::pair<Eigen::Index, Eigen::Index> greedy_coupled_step(const StochasticKernel& K,
                                                          Eigen::Index x, Eigen::Index y,
                                                          Rng& rng);

// Same coupling with the per-pair overlap decomposition memoized; use for
// long runs over few distinct pairs.
class GreedyCoupling {
public:
    explicit GreedyCoupling(const StochasticKernel& kernel) : kernel_(kernel) {}
    std::pair<Eigen::Index, Eigen::Index> step(Eigen::Index x, Eigen::Index y, Rng& rng);

private:
    struct Decomposition {
        double delta;                // one-step meeting probability
        Eigen::VectorXd overlap;     // min of the rows, normalized
        Eigen::VectorXd residual_x;  // (K(x,.)-K(y,.))_+, normalized
        Eigen::VectorXd residual_y;
    };
    const Decomposition& decomposition(Eigen::Index x, Eigen::Index y);

    const StochasticKernel& kernel_;
    std::unordered_map<std::uint64_t, Decomposition> cache_;
};

// Monte-Carlo survival curve of the coupling time tau = min{t : X_t = Y_t}:
// estimates P(tau > t) for t = 0..t_max from independent replicas.
std::vector<double> coupling_tail(const StochasticKernel& K, Eigen::Index x, Eigen::Index y,
                                  std::size_t t_max, std::size_t replicas, Rng& rng);

// Exact decay-of-correlations check for one block of a factorization
// structure: for each radius r, the worst-case Hellinger distance between the
// block conditionals under any two clamps of the complement of B_r(S_j u
// Pi_j), plus a least-squares fit log(distance) ~ -m r + log C1.
struct DecayEstimate {
    struct Point {
        int r;
        double distance;
        bool exact;  // false when the boundary was sampled (lower bound only)
    };
    std::vector<Point> points;
    double fitted_m = std::numeric_limits<double>::infinity();
    double fitted_c1 = 0.0;
};

struct DecayOptions {
    std::size_t enumeration_cap = kDefaultEnumerationCap;
    // Full clamp enumeration up to this many boundary sites, sampled pairs
    // beyond (reported as a lower bound).
    int exact_boundary_limit = 12;
    std::size_t sampled_pairs = 512;
    std::uint64_t sample_seed = 0;
};

DecayEstimate decay_estimate(const FactorGraph& g, const FactorizationStructure& fs,
                             std::size_t block, const std::vector<int>& r_values,
                             const DecayOptions& opts = {});

}  // namespace pgibbs
