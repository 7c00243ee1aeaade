#pragma once

#include <vector>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/measures.hpp"
#include "pgibbs/rng.hpp"

namespace pgibbs {

// Distribution p(i) proportional to exp(s_i), s_i = sum of the factors at
// `vertex` evaluated at sigma with vertex relabelled to i. Log-domain softmax
// with max subtraction; -inf table entries give zero-weight labels; all
// labels -inf is an error.
Eigen::VectorXd site_conditional(const FactorGraph& g, const Configuration& sigma, int vertex);

// One step of the single-site Gibbs sampler: uniform vertex, then a label
// drawn from the site conditional. Changes sigma in at most one site.
Configuration gibbs_step(const FactorGraph& g, const Configuration& sigma, Rng& rng);

// In-place variant used by long-running chains; returns the updated vertex.
int gibbs_step_inplace(const FactorGraph& g, Configuration& sigma, Rng& rng);

// Exact transition matrix of the sampler over the enumerated state space:
// Q(sigma, sigma_{x->j}) = (1/|V|) p_x(j), diagonal collecting every (x, j)
// that leaves sigma unchanged.
StochasticKernel gibbs_kernel(const FactorGraph& g,
                              std::size_t enumeration_cap = kDefaultEnumerationCap);

// Same chain but the updated vertex is drawn uniformly from B only; labels
// outside B never change. B empty gives the identity kernel.
StochasticKernel restricted_kernel(const FactorGraph& g, const std::vector<int>& b,
                                   std::size_t enumeration_cap = kDefaultEnumerationCap);

}  // namespace pgibbs
