#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pgibbs/measures.hpp"
#include "pgibbs/state_space.hpp"

namespace pgibbs {

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t(1) << 20;
inline constexpr int kMaxScopeSize = 6;

// A real-valued factor stored as a dense table over the labels of its scope,
// row-major in scope order (first scope vertex most significant). Entries may
// be -inf to encode hard constraints; NaN and +inf are rejected.
struct Factor {
    std::vector<int> scope;
    Eigen::VectorXd table;

    double value(const Configuration& sigma, int q) const {
        std::size_t idx = 0;
        for (int v : scope) idx = idx * q + static_cast<std::size_t>(sigma[v]);
        return table[static_cast<Eigen::Index>(idx)];
    }
};

// Factor graph G = (V, Phi, E) over labels {0,..,q-1}. Vertices are
// 0..num_vertices-1; optional names are kept for serialization. Dependency
// sets and the tight scope of every factor are computed at construction, so
// instances are immutable and cheap to sample from afterwards.
class FactorGraph {
public:
    FactorGraph(int num_vertices, int q, std::vector<Factor> factors,
                std::vector<std::pair<int, int>> edges,
                std::vector<std::string> vertex_names = {});

    int num_vertices() const { return n_; }
    int labels() const { return q_; }
    ProductSpace space() const { return ProductSpace(n_, q_); }
    const std::vector<Factor>& factors() const { return factors_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::string>& vertex_names() const { return names_; }

    // Tight scope S[phi]: vertices the factor genuinely depends on.
    const std::vector<int>& tight_scope(std::size_t factor) const {
        return tight_scopes_[factor];
    }
    // A[x]: indices of factors whose tight scope contains x.
    const std::vector<int>& factors_at(int vertex) const { return factors_at_[vertex]; }
    // Neighbours under the union adjacency: graph edges plus co-occurrence in
    // a tight factor scope.
    const std::vector<int>& neighbours(int vertex) const { return adjacency_[vertex]; }

    double log_weight(const Configuration& sigma) const;

private:
    int n_;
    int q_;
    std::vector<Factor> factors_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::string> names_;
    std::vector<std::vector<int>> tight_scopes_;
    std::vector<std::vector<int>> factors_at_;
    std::vector<std::vector<int>> adjacency_;
};

// Exact Gibbs measure mu(sigma) proportional to exp(sum_phi phi(sigma)),
// enumerated over the whole space (log-sum-exp normalization). Throws
// BudgetError when q^|V| exceeds the cap.
DenseDistribution gibbs_measure(const FactorGraph& g,
                                std::size_t enumeration_cap = kDefaultEnumerationCap);

// Dependency sets as plain values: A[x] per vertex and the tight scope per
// factor (consistent: x in S[phi] iff phi in A[x]).
struct DependencySets {
    std::vector<std::vector<int>> factors_per_vertex;
    std::vector<std::vector<int>> scope_per_factor;
};
DependencySets dependency_sets(const FactorGraph& g);

// Validates the factorization structure against the enumerated Gibbs measure.
// Returns nullopt on pass, otherwise a witness configuration + block index.
std::optional<FactorizationWitness> validate_factorization(
    const FactorGraph& g, const FactorizationStructure& fs,
    std::size_t enumeration_cap = kDefaultEnumerationCap, double tol = 1e-9);

// B_r(A) = { x : d(x, A) < r } under the union adjacency; B_1(A) = A.
std::vector<int> graph_ball(const FactorGraph& g, const std::vector<int>& a, int r);

}  // namespace pgibbs
