#pragma once

#include <cstddef>
#include <optional>

#include "pgibbs/measures.hpp"

namespace pgibbs {

// Two-state chains Q(1,2)=Q(2,1)=p and K(1,2)=Cp, K(2,1)=p, compared in
// L2(mu) with mu the (uniform) stationary measure of Q.
struct TwoStateRecord {
    double p = 0.0;
    double c = 0.0;
    double kernel_dist = 0.0;      // sup-row L2(mu) distance between Q and K
    double stat_dist = 0.0;        // L2(mu) distance between mu and nu
    std::size_t mix_q = 0;         // tau_mix(Q, L2(mu), eps)
    std::size_t mix_k = 0;
    double ratio = 0.0;            // stat_dist / (min(mix) * kernel_dist); 0 when K = Q
    double rate_q = 0.0;           // 1 - |second eigenvalue|
    double rate_k = 0.0;
};
TwoStateRecord two_state_analysis(double p, double c, double eps = 0.25,
                                  std::size_t step_cap = 1'000'000);

// Build the drift chain Q_{n,p} on states {1..n} and its teleporting
// perturbation K = (1-eps)Q + eps * (jump to n) with eps = C_n / n.
StochasticKernel birth_death_kernel(int n, double p);
StochasticKernel teleport_kernel(const StochasticKernel& q, double eps, Eigen::Index target);

struct BirthDeathRecord {
    int n = 0;
    double p = 0.0;
    double c_n = 0.0;
    double kernel_tv = 0.0;      // sup-row TV between Q and K
    double mu_low = 0.0;         // mu({i <= n/3})
    double nu_low = 0.0;         // nu({i < 2n/3})
    double tv_stationary = 0.0;
    std::optional<std::size_t> mix_q;  // TV mixing times, computed for n <= mixing_limit
    std::optional<std::size_t> mix_k;
};
BirthDeathRecord birth_death_analysis(int n, double p, double c_n, int mixing_limit = 150,
                                      std::size_t step_cap = 1'000'000);

// Product of n^2 iid Bernoulli coordinates, parameter p versus ptilde.
// kernel_tv is the exact sup-row TV between the single-site Gibbs samplers;
// exact_tv is computed through the count sufficient statistic (binomial
// laws); adell_bound is the closed-form binomial perturbation bound, +inf
// when its premise C(ptilde-p) >= 1 fails.
struct ProductBernoulliRecord {
    int n = 0;
    double p = 0.0;
    double ptilde = 0.0;
    double kernel_tv = 0.0;
    double adell_bound = 0.0;
    double exact_tv = 0.0;
};
ProductBernoulliRecord product_bernoulli_analysis(int n, double p, double ptilde);

// TV between Binomial(m, p) and Binomial(m, ptilde) by direct summation.
double binomial_tv(int m, double p, double ptilde);

}  // namespace pgibbs
