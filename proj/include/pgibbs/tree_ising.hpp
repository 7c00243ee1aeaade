#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/pseudo_marginal.hpp"

namespace pgibbs {

// Depth-d binary tree in heap order: root 0, children of v are 2v+1 and
// 2v+2. Labels are 0/1 with spin +1 for label 0 and -1 for label 1.
int tree_vertex_count(int depth);
inline int tree_parent(int v) { return (v - 1) / 2; }
inline int spin_of(int label) { return 1 - 2 * label; }

// Ising coupling factors beta * spin(u) * spin(v) on every tree edge.
FactorGraph tree_prior_graph(int depth, double beta);

// Prior plus the exact per-vertex observation factors; its Gibbs measure is
// the posterior given z.
FactorGraph tree_posterior_graph(int depth, double beta, const ObservationSet& z);

// Single-vertex blocks in breadth-first order, each conditioned on its
// parent.
FactorizationStructure tree_blocks(int depth);

// Draw a hidden configuration from the prior (root marginal plus downward
// conditionals, exact on the tree) and flip-noise observations around it.
struct TreeSample {
    Configuration sigma_true;
    ObservationSet z;
};
TreeSample generate(int depth, double beta, double delta, const std::vector<int>& counts,
                    std::uint64_t seed);

// Largest beta for which 1 - e^{-6 beta} < 1/2.
double decay_threshold_beta();

// Root-to-leaf path through the left children.
std::vector<int> leftmost_path(int depth);

// For each path position j, the exact TV between the laws of the path tail
// (gamma_j..gamma_k) under root clamps +1 vs -1, next to the coupling bound
// (1 - e^{-6 beta})^{j-1}. Exact at any depth: off-path subtrees are summed
// out and the path tail (at most 2^k states) is enumerated.
struct PathDecayPoint {
    int position;
    double exact_tv;
    double bound;
};
std::vector<PathDecayPoint> path_decay_check(int depth, double beta, const ObservationSet& z,
                                             const std::vector<int>& path);

// Law of the path tail (gamma_j..gamma_k) given sigma(root) = root_label,
// indexed row-major over the tail vertices.
DenseDistribution path_tail_law(int depth, double beta, const ObservationSet& z,
                                const std::vector<int>& path, std::size_t j, int root_label);

// ---------------------------------------------------------------------------
// Scaling study across depths: exact posterior chain vs alternating
// subsampled chain, reporting a kernel-perturbation proxy and the
// block-aggregated Hellinger upper bound estimated from long runs.
// ---------------------------------------------------------------------------

struct ScalingOptions {
    std::vector<int> depths{2, 3, 4, 5, 6};
    double beta = 0.1;
    double delta = 0.2;
    int obs_per_vertex = 4;
    // Per-depth subsample sizes (broadcast when a single value is given);
    // clamped to [1, obs_per_vertex].
    std::vector<int> subsample_m{3, 4, 4, 4, 4};
    std::size_t replicas = 32;
    std::size_t steps = 1'000'000;
    double burn_in_fraction = 0.2;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency
    std::size_t augmented_cap = kDefaultAugmentedCap;
};

struct ScalingRecord {
    int depth = 0;
    int gamma = 0;  // number of blocks = number of vertices
    int subsample_m = 0;
    double perturbation_proxy = 0.0;
    bool proxy_exact = false;  // true when the sup over Omega x A was enumerated
    double hellinger_upper = 0.0;
    double std_error = 0.0;
    std::vector<double> replica_uppers;
};

struct ScalingStudy {
    std::vector<ScalingRecord> records;
    std::vector<std::pair<int, std::string>> skipped;  // per-depth budget failures
};

ScalingStudy scaling_study(const ScalingOptions& opts);

// Ordinary least-squares slope of y against x.
double linear_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pgibbs
