#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pgibbs/errors.hpp"
#include "pgibbs/state_space.hpp"

namespace pgibbs {

inline constexpr double kMassTolerance = 1e-12;

// A probability vector over an explicitly indexed finite state space.
// Immutable after construction.
class DenseDistribution {
public:
    explicit DenseDistribution(Eigen::VectorXd mass);

    static DenseDistribution uniform(Eigen::Index n);
    // Normalizes a non-negative vector (throws if the total mass is zero).
    static DenseDistribution from_unnormalized(Eigen::VectorXd weights);
    // Normalizes exp(logw - max) of a log-weight vector (log-sum-exp).
    static DenseDistribution from_log_weights(const Eigen::VectorXd& log_weights);

    Eigen::Index size() const { return mass_.size(); }
    const Eigen::VectorXd& mass() const { return mass_; }
    double operator[](Eigen::Index i) const { return mass_[i]; }

private:
    Eigen::VectorXd mass_;
};

// A row-stochastic matrix over an indexed state space; row x is the law of
// the next state from x. Immutable after construction.
class StochasticKernel {
public:
    explicit StochasticKernel(Eigen::MatrixXd rows);

    static StochasticKernel identity(Eigen::Index n);

    Eigen::Index size() const { return rows_.rows(); }
    const Eigen::MatrixXd& matrix() const { return rows_; }
    auto row(Eigen::Index x) const { return rows_.row(x).transpose(); }

private:
    Eigen::MatrixXd rows_;
};

// ---------------------------------------------------------------------------
// Distances. The free functions accept any Eigen vector expressions so kernel
// rows can be passed without copies.
// ---------------------------------------------------------------------------

namespace detail {
inline void check_same_support(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": mismatched supports");
}
}  // namespace detail

// Total variation, half-L1 convention: sup_A |p(A) - q(A)| = (1/2) sum |p-q|.
template <typename DA, typename DB>
double tv_distance(const Eigen::MatrixBase<DA>& p, const Eigen::MatrixBase<DB>& q) {
    detail::check_same_support(p.size(), q.size(), "tv_distance");
    return 0.5 * (p.derived().template cast<double>() - q.derived().template cast<double>())
                     .cwiseAbs()
                     .sum();
}

// Hellinger distance sqrt(sum (sqrt p - sqrt q)^2); range [0, sqrt 2].
template <typename DA, typename DB>
double hellinger_distance(const Eigen::MatrixBase<DA>& p, const Eigen::MatrixBase<DB>& q) {
    detail::check_same_support(p.size(), q.size(), "hellinger_distance");
    return std::sqrt(
        (p.derived().cwiseSqrt() - q.derived().cwiseSqrt()).cwiseAbs2().sum());
}

// L2(lambda) distance between p and q with densities taken with respect to
// the reference distribution lambda: sqrt(sum ((p-q)/lambda)^2 lambda).
// lambda must be strictly positive wherever p and q disagree.
template <typename DA, typename DB, typename DL>
double l2_distance(const Eigen::MatrixBase<DA>& p, const Eigen::MatrixBase<DB>& q,
                   const Eigen::MatrixBase<DL>& lambda) {
    detail::check_same_support(p.size(), q.size(), "l2_distance");
    detail::check_same_support(p.size(), lambda.size(), "l2_distance");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double diff = p.derived()[i] - q.derived()[i];
        const double l = lambda.derived()[i];
        if (diff == 0.0) continue;
        if (!(l > 0.0))
            throw std::domain_error("l2_distance: reference has zero mass at a discrepancy point");
        sum += diff / l * diff;
    }
    return std::sqrt(sum);
}

inline double tv_distance(const DenseDistribution& p, const DenseDistribution& q) {
    return tv_distance(p.mass(), q.mass());
}
inline double hellinger_distance(const DenseDistribution& p, const DenseDistribution& q) {
    return hellinger_distance(p.mass(), q.mass());
}
inline double l2_distance(const DenseDistribution& p, const DenseDistribution& q,
                          const DenseDistribution& lambda) {
    return l2_distance(p.mass(), q.mass(), lambda.mass());
}

// A distance on distributions: TV, Hellinger, or L2 with an explicit
// reference. The "counting" convenience is the normalized counting measure
// (uniform reference); callers may also pass e.g. the stationary measure of
// an unperturbed chain.
class Metric {
public:
    enum class Kind { TV, Hellinger, L2 };

    static Metric tv() { return Metric(Kind::TV, {}); }
    static Metric hellinger() { return Metric(Kind::Hellinger, {}); }
    static Metric l2(DenseDistribution reference) {
        return Metric(Kind::L2, std::move(reference));
    }
    static Metric l2_counting(Eigen::Index n) {
        return Metric(Kind::L2, DenseDistribution::uniform(n));
    }

    Kind kind() const { return kind_; }
    const DenseDistribution& reference() const { return *reference_; }

    template <typename DA, typename DB>
    double operator()(const Eigen::MatrixBase<DA>& p, const Eigen::MatrixBase<DB>& q) const {
        switch (kind_) {
            case Kind::TV: return tv_distance(p, q);
            case Kind::Hellinger: return hellinger_distance(p, q);
            case Kind::L2: return l2_distance(p, q, reference_->mass());
        }
        return 0.0;
    }
    double operator()(const DenseDistribution& p, const DenseDistribution& q) const {
        return (*this)(p.mass(), q.mass());
    }

private:
    Metric(Kind kind, std::optional<DenseDistribution> reference)
        : kind_(kind), reference_(std::move(reference)) {}
    Kind kind_;
    std::optional<DenseDistribution> reference_;
};

// sup over rows x of metric(Q(x,.), K(x,.)).
double kernel_distance(const StochasticKernel& Q, const StochasticKernel& K,
                       const Metric& metric);

// ---------------------------------------------------------------------------
// Stationary distributions and mixing times
// ---------------------------------------------------------------------------

struct StationaryOptions {
    // Direct linear solve up to this size, power iteration above it.
    Eigen::Index direct_solve_limit = 4096;
    double power_tolerance = 1e-13;
    std::size_t power_iteration_cap = 10'000'000;
    double residual_tolerance = 1e-12;  // required ||pi K - pi||_1
};

// Unique fixed point pi with pi K = pi. Throws ConvergenceError when no
// fixed point passes the residual check (e.g. reducible kernels).
DenseDistribution stationary_distribution(const StochasticKernel& K,
                                          const StationaryOptions& opts = {});

// Smallest t with sup_x metric(K^t(x,.), pi) < eps, by exact matrix powering.
// Throws BudgetError carrying the cap if t exceeds it.
std::size_t mixing_time(const StochasticKernel& K, const Metric& metric, double eps,
                        std::size_t step_cap = 1'000'000);
std::size_t mixing_time(const StochasticKernel& K, const Metric& metric, double eps,
                        const DenseDistribution& pi, std::size_t step_cap);

// ---------------------------------------------------------------------------
// Conditionals / restrictions on product spaces
// ---------------------------------------------------------------------------

// Restriction of mu to `targets`: marginalize, optionally after conditioning
// on the partial assignment `clamp` (which must not touch `targets`). The
// result is indexed row-major over `targets` in the order given. Throws
// ConditioningError if the clamped event has zero probability.
DenseDistribution conditional_marginal(const DenseDistribution& mu, const ProductSpace& space,
                                       const std::vector<int>& targets,
                                       const PartialConfiguration& clamp = {});

// ---------------------------------------------------------------------------
// Factorization structures and Hellinger subadditivity
// ---------------------------------------------------------------------------

// Ordered blocks (S_1,Pi_1),..,(S_Gamma,Pi_Gamma): the S_j partition the
// vertex set, Pi_1 is empty and each Pi_j lies in S_1 u .. u S_{j-1}.
struct FactorizationStructure {
    struct Block {
        std::vector<int> s;
        std::vector<int> pi;
    };
    std::vector<Block> blocks;

    // Structural sanity (partition + parent-set containment) over n vertices.
    void validate_shape(int num_vertices) const;
};

struct FactorizationWitness {
    Configuration sigma;
    std::size_t block;  // first block whose parent-set conditional deviates
    double relative_error;
};

// Checks mu(sigma) = prod_j mu|_{S_j}^{sigma|_{Pi_j}}(sigma) for all sigma,
// at relative tolerance `tol`. Returns nullopt on pass.
std::optional<FactorizationWitness> check_factorization(const DenseDistribution& mu,
                                                        const ProductSpace& space,
                                                        const FactorizationStructure& fs,
                                                        double tol = 1e-9);

// lhs = d_H^2(mu,nu), rhs = sum_j d_H^2 of the block marginals on S_j u Pi_j.
// Both measures must factorize over fs (checked; StructureError otherwise).
struct SubadditivityResult {
    double lhs;
    double rhs;
};
SubadditivityResult subadditivity_gap(const DenseDistribution& mu, const DenseDistribution& nu,
                                      const ProductSpace& space,
                                      const FactorizationStructure& fs);

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

// kernel_dist / sqrt((1-rho)^2 - kernel_dist^2); requires 0 < rho < 1 and
// 0 <= kernel_dist < 1-rho.
double l2_perturbation_bound(double kernel_dist, double rho);

// (1-r)/(1+r) for r in (0,1]: the exact TV of the extremal two-point pair
// (delta,1-delta) vs (1-delta,delta) with delta = r/(1+r).
double worst_pair_tv_bound(double r);

}  // namespace pgibbs
