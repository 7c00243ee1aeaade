#pragma once

#include <cstdint>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/rng.hpp"

namespace pgibbs {

// Random connected factor graph with q^|V| <= max_states: a random spanning
// tree plus a few extra edges, pairwise factors on every edge and single-site
// fields, all tables iid uniform in [-scale, scale].
FactorGraph random_factor_graph(Rng& rng, std::size_t max_states = 4096, double scale = 1.5);

// Two Gibbs measures over the same random tree (distinct random potentials)
// together with the breadth-first factorization structure they share.
struct TreeMeasurePair {
    FactorGraph first;
    FactorGraph second;
    FactorizationStructure structure;
};
TreeMeasurePair random_tree_measure_pair(Rng& rng, int max_vertices = 8, int max_labels = 3,
                                         double scale = 1.0);

// Random probability vector (normalized iid exponentials).
DenseDistribution random_distribution(Rng& rng, Eigen::Index n);

// Random row-stochastic kernel with every entry positive.
StochasticKernel random_kernel(Rng& rng, Eigen::Index n);

}  // namespace pgibbs
