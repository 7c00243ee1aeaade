#include "pgibbs/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace pgibbs {

namespace {

// Does the factor genuinely depend on scope position `pos`? True when two
// assignments differing only there have different table values.
bool depends_on_position(const Factor& f, std::size_t pos, int q) {
    const std::size_t scope_size = f.scope.size();
    std::size_t stride = 1;
    for (std::size_t k = pos + 1; k < scope_size; ++k) stride *= q;
    const std::size_t table_size = static_cast<std::size_t>(f.table.size());
    for (std::size_t idx = 0; idx < table_size; ++idx) {
        const std::size_t digit = (idx / stride) % q;
        if (digit + 1 < static_cast<std::size_t>(q)) {
            if (f.table[static_cast<Eigen::Index>(idx)] !=
                f.table[static_cast<Eigen::Index>(idx + stride)])
                return true;
        }
    }
    return false;
}

}  // namespace

FactorGraph::FactorGraph(int num_vertices, int q, std::vector<Factor> factors,
                         std::vector<std::pair<int, int>> edges,
                         std::vector<std::string> vertex_names)
    : n_(num_vertices),
      q_(q),
      factors_(std::move(factors)),
      edges_(std::move(edges)),
      names_(std::move(vertex_names)) {
    if (n_ < 1) throw std::invalid_argument("FactorGraph: need at least one vertex");
    if (q_ < 2) throw std::invalid_argument("FactorGraph: need at least two labels");
    if (!names_.empty() && static_cast<int>(names_.size()) != n_)
        throw std::invalid_argument("FactorGraph: vertex name count mismatch");
    if (names_.empty()) {
        names_.reserve(n_);
        for (int v = 0; v < n_; ++v) names_.push_back(std::to_string(v));
    }

    for (const auto& [u, v] : edges_) {
        if (u < 0 || u >= n_ || v < 0 || v >= n_)
            throw std::invalid_argument("FactorGraph: edge endpoint outside vertex set");
        if (u == v) throw std::invalid_argument("FactorGraph: edge endpoints must be distinct");
    }

    tight_scopes_.resize(factors_.size());
    for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
        const Factor& f = factors_[fi];
        if (static_cast<int>(f.scope.size()) > kMaxScopeSize)
            throw std::invalid_argument("FactorGraph: factor scope larger than cap");
        std::set<int> distinct(f.scope.begin(), f.scope.end());
        if (distinct.size() != f.scope.size())
            throw std::invalid_argument("FactorGraph: repeated vertex in factor scope");
        std::size_t expect = 1;
        for (std::size_t k = 0; k < f.scope.size(); ++k) expect *= q_;
        if (static_cast<std::size_t>(f.table.size()) != expect)
            throw std::invalid_argument("FactorGraph: factor table size mismatch");
        for (Eigen::Index i = 0; i < f.table.size(); ++i) {
            const double x = f.table[i];
            if (std::isnan(x) || x == std::numeric_limits<double>::infinity())
                throw std::invalid_argument("FactorGraph: factor entries must not be NaN/+inf");
        }
        for (std::size_t pos = 0; pos < f.scope.size(); ++pos) {
            const int v = f.scope[pos];
            if (v < 0 || v >= n_)
                throw std::invalid_argument("FactorGraph: factor scope outside vertex set");
            if (depends_on_position(f, pos, q_)) tight_scopes_[fi].push_back(v);
        }
    }

    factors_at_.resize(n_);
    for (std::size_t fi = 0; fi < factors_.size(); ++fi)
        for (int v : tight_scopes_[fi]) factors_at_[v].push_back(static_cast<int>(fi));

    std::vector<std::set<int>> adj(n_);
    for (const auto& [u, v] : edges_) {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    for (const auto& scope : tight_scopes_)
        for (int u : scope)
            for (int v : scope)
                if (u != v) adj[u].insert(v);
    adjacency_.resize(n_);
    for (int v = 0; v < n_; ++v) adjacency_[v].assign(adj[v].begin(), adj[v].end());
}

double FactorGraph::log_weight(const Configuration& sigma) const {
    double s = 0.0;
    for (const Factor& f : factors_) s += f.value(sigma, q_);
    return s;
}

DenseDistribution gibbs_measure(const FactorGraph& g, std::size_t enumeration_cap) {
    const std::size_t size =
        checked_pow(g.labels(), g.num_vertices(), enumeration_cap, "gibbs_measure");
    if (size > enumeration_cap)
        throw BudgetError("gibbs_measure: state space over cap", enumeration_cap, size);
    const ProductSpace space = g.space();
    Eigen::VectorXd logw(static_cast<Eigen::Index>(size));
    Configuration sigma;
    for (std::size_t s = 0; s < size; ++s) {
        space.decode_into(s, sigma);
        logw[static_cast<Eigen::Index>(s)] = g.log_weight(sigma);
    }
    return DenseDistribution::from_log_weights(logw);
}

DependencySets dependency_sets(const FactorGraph& g) {
    DependencySets out;
    out.factors_per_vertex.reserve(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) out.factors_per_vertex.push_back(g.factors_at(v));
    out.scope_per_factor.reserve(g.factors().size());
    for (std::size_t fi = 0; fi < g.factors().size(); ++fi)
        out.scope_per_factor.push_back(g.tight_scope(fi));
    return out;
}

std::optional<FactorizationWitness> validate_factorization(const FactorGraph& g,
                                                           const FactorizationStructure& fs,
                                                           std::size_t enumeration_cap,
                                                           double tol) {
    const DenseDistribution mu = gibbs_measure(g, enumeration_cap);
    return check_factorization(mu, g.space(), fs, tol);
}

std::vector<int> graph_ball(const FactorGraph& g, const std::vector<int>& a, int r) {
    if (r < 1) throw std::invalid_argument("graph_ball: radius must be positive");
    std::vector<int> dist(g.num_vertices(), -1);
    std::deque<int> queue;
    for (int v : a) {
        if (v < 0 || v >= g.num_vertices())
            throw std::invalid_argument("graph_ball: vertex outside graph");
        if (dist[v] == -1) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (dist[v] + 1 >= r) continue;
        for (int w : g.neighbours(v)) {
            if (dist[w] == -1) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    std::vector<int> ball;
    for (int v = 0; v < g.num_vertices(); ++v)
        if (dist[v] != -1 && dist[v] < r) ball.push_back(v);
    return ball;
}

}  // namespace pgibbs
