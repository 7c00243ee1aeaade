#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/gibbs.hpp"
#include "pgibbs/measures.hpp"
#include "pgibbs/rng.hpp"

namespace pgibbs {

inline constexpr std::size_t kDefaultAugmentedCap = std::size_t(1) << 22;

// Per-vertex observations z_{ij} with a shared log-likelihood table
// loglik(state_label, observed_label). Labels are 0-based.
struct ObservationSet {
    std::vector<std::vector<int>> obs;  // obs[v] = observed labels at vertex v
    Eigen::MatrixXd loglik;             // q x q, finite entries

    int count(int vertex) const { return static_cast<int>(obs[vertex].size()); }
    int num_vertices() const { return static_cast<int>(obs.size()); }
    int labels() const { return static_cast<int>(loglik.rows()); }

    // Exact per-vertex log-likelihood sum_{j} loglik(label, z_{vj}).
    double exact_vertex_loglik(int vertex, int label) const {
        double s = 0.0;
        for (int z : obs[vertex]) s += loglik(label, z);
        return s;
    }

    // Symmetric flip-noise channel: the observation equals the state with
    // probability 1-delta, otherwise one of the other labels uniformly.
    static ObservationSet flip_noise(std::vector<std::vector<int>> obs, int q, double delta);

    void validate() const;
};

// Fixed-size subsets a_v of the observation indices [0, n_v), one per vertex.
struct SubsampleVector {
    std::vector<std::vector<int>> sets;  // each sorted ascending

    // First m_v indices of every vertex (deterministic initial state).
    static SubsampleVector prefix(const ObservationSet& z, const std::vector<int>& m);
};

struct AugmentedState {
    Configuration sigma;
    SubsampleVector a;
};

// Identifies a factor of Phi = Phi_1 u Phi_2: either a prior factor of the
// graph or the observation factor of a vertex.
struct FactorId {
    enum class Kind { Prior, Observation };
    Kind kind;
    int index;  // factor index (Prior) or vertex (Observation)

    static FactorId prior(int factor) { return {Kind::Prior, factor}; }
    static FactorId observation(int vertex) { return {Kind::Observation, vertex}; }
};

// Optional per-vertex subsample weight log g_v(a_v); empty means uniform over
// the size-m_v subsets.
using SubsampleLogWeight = std::function<double(int vertex, const std::vector<int>& subset)>;

// Plug-in estimator: prior factors are evaluated exactly; the observation
// factor of vertex v is inflated from the subsample,
// (n_v/|a_v|) sum_{j in a_v} loglik(sigma(v), z_{vj}).
double estimate_log_likelihood(const FactorGraph& g, FactorId phi, const Configuration& sigma,
                               const SubsampleVector& a, const ObservationSet& z);

// One step of the alternating sampler: a single-site update of sigma driven
// by the subsampled estimates, then a single proposed swap in one subsample
// set accepted through the two-point law p2 proportional to g exp(l).
// Vertices with a full (or empty) subsample make the swap phase a no-op.
AugmentedState alternating_step(const FactorGraph& g, const AugmentedState& state,
                                const ObservationSet& z, const SubsampleLogWeight& weights,
                                Rng& rng);

// In-place variant for long chains; returns the sigma vertex that was
// resampled (its label may or may not have changed).
int alternating_step_inplace(const FactorGraph& g, AugmentedState& state,
                             const ObservationSet& z, const SubsampleLogWeight& weights,
                             Rng& rng);

// Estimated single-site conditional p1 over labels for an update at `vertex`
// given the current subsamples.
Eigen::VectorXd estimated_site_conditional(const FactorGraph& g, const ObservationSet& z,
                                           const SubsampleVector& a, const Configuration& sigma,
                                           int vertex);

// All size-m subsets of {0,..,n-1} in lexicographic order.
std::vector<std::vector<int>> size_m_subsets(int n, int m);

// The prior graph extended with the exact observation factor of every vertex
// that has observations; its Gibbs measure is the exact posterior.
FactorGraph with_exact_observations(const FactorGraph& g, const ObservationSet& z);

// Enumeration of the subsample component: all size-m_v subsets per vertex,
// lexicographic, with the product space indexed mixed-radix (vertex 0 most
// significant).
class SubsampleSpace {
public:
    SubsampleSpace(const ObservationSet& z, const std::vector<int>& m);

    std::size_t size() const { return size_; }
    const std::vector<std::vector<int>>& subsets(int vertex) const { return subsets_[vertex]; }
    std::size_t encode(const SubsampleVector& a) const;
    SubsampleVector decode(std::size_t index) const;

private:
    std::vector<std::vector<std::vector<int>>> subsets_;
    std::size_t size_;
};

struct ExactTargets {
    DenseDistribution augmented;  // nu_hat over Omega x A (sigma-major)
    DenseDistribution marginal;   // nu, the Omega-marginal
};

// Brute-force normalized targets of the alternating sampler. Throws
// BudgetError when |Omega| * |A| exceeds the cap.
ExactTargets exact_targets(const FactorGraph& g, const ObservationSet& z,
                           const SubsampleLogWeight& weights, const std::vector<int>& m,
                           std::size_t cap = kDefaultAugmentedCap);

// Exact transition matrix of the alternating sampler on Omega x A, assembled
// as the composition (sigma phase) * (swap phase).
StochasticKernel alternating_kernel(const FactorGraph& g, const ObservationSet& z,
                                    const SubsampleLogWeight& weights, const std::vector<int>& m,
                                    std::size_t cap = kDefaultAugmentedCap);

// Law of the sigma component after one alternating step from (sigma, a),
// as a row over Omega.
Eigen::VectorXd sigma_phase_row(const FactorGraph& g, const ObservationSet& z,
                                const SubsampleVector& a, const Configuration& sigma);

// Exact sup over augmented states (sigma, a) of the metric between the
// exact-posterior Gibbs row at sigma and the Omega-marginal row of one
// alternating step from (sigma, a).
double perturbation_sup(const FactorGraph& g, const ObservationSet& z,
                        const SubsampleLogWeight& weights, const std::vector<int>& m,
                        const Metric& metric, std::size_t cap = kDefaultAugmentedCap);

}  // namespace pgibbs
