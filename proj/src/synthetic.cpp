#include "pgibbs/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace pgibbs {

namespace {

double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_real(rng);
}

Eigen::VectorXd random_table(Rng& rng, std::size_t size, double scale) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(size));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = uniform_in(rng, -scale, scale);
    return t;
}

}  // namespace

FactorGraph random_factor_graph(Rng& rng, std::size_t max_states, double scale) {
    // Pick q first, then as many vertices as the state cap allows.
    const int q = 2 + static_cast<int>(uniform_index(rng, 3));  // 2..4
    int max_n = 1;
    std::size_t states = q;
    while (states * q <= max_states) {
        states *= q;
        ++max_n;
    }
    const int lo = std::min(3, max_n);
    const int n = lo + static_cast<int>(uniform_index(rng, max_n - lo + 1));

    std::vector<std::pair<int, int>> edges;
    std::vector<Factor> factors;
    // Random spanning tree: attach each vertex to a uniform earlier one.
    for (int v = 1; v < n; ++v) {
        const int u = static_cast<int>(uniform_index(rng, v));
        edges.emplace_back(u, v);
        factors.push_back(Factor{{u, v}, random_table(rng, q * q, scale)});
    }
    // A few extra pairwise factors.
    const int extras = static_cast<int>(uniform_index(rng, n));
    for (int e = 0; e < extras && n >= 2; ++e) {
        const int u = static_cast<int>(uniform_index(rng, n));
        int v = static_cast<int>(uniform_index(rng, n - 1));
        if (v >= u) ++v;
        edges.emplace_back(u, v);
        factors.push_back(Factor{{u, v}, random_table(rng, q * q, scale)});
    }
    // Single-site fields on about half of the vertices.
    for (int v = 0; v < n; ++v)
        if (uniform_real(rng) < 0.5)
            factors.push_back(Factor{{v}, random_table(rng, q, scale)});
    return FactorGraph(n, q, std::move(factors), std::move(edges));
}

TreeMeasurePair random_tree_measure_pair(Rng& rng, int max_vertices, int max_labels,
                                         double scale) {
    const int n = 2 + static_cast<int>(uniform_index(rng, std::max(1, max_vertices - 1)));
    const int q = 2 + static_cast<int>(uniform_index(rng, std::max(1, max_labels - 1)));

    // Random tree with parent(v) < v; blocks in vertex order then satisfy the
    // parent-precedes-child requirement.
    std::vector<int> parent(n, -1);
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) {
        parent[v] = static_cast<int>(uniform_index(rng, v));
        edges.emplace_back(parent[v], v);
    }

    auto build = [&](double s) {
        std::vector<Factor> factors;
        for (int v = 1; v < n; ++v)
            factors.push_back(Factor{{parent[v], v}, random_table(rng, q * q, s)});
        for (int v = 0; v < n; ++v)
            if (uniform_real(rng) < 0.5)
                factors.push_back(Factor{{v}, random_table(rng, q, s)});
        return FactorGraph(n, q, std::move(factors), edges);
    };

    TreeMeasurePair out{build(scale), build(scale), {}};
    for (int v = 0; v < n; ++v) {
        FactorizationStructure::Block b;
        b.s = {v};
        if (v > 0) b.pi = {parent[v]};
        out.structure.blocks.push_back(std::move(b));
    }
    return out;
}

DenseDistribution random_distribution(Rng& rng, Eigen::Index n) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = -std::log(1.0 - uniform_real(rng));
    return DenseDistribution::from_unnormalized(std::move(w));
}

StochasticKernel random_kernel(Rng& rng, Eigen::Index n) {
    Eigen::MatrixXd rows(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) rows(x, y) = -std::log(1.0 - uniform_real(rng));
        rows.row(x) /= rows.row(x).sum();
    }
    return StochasticKernel(std::move(rows));
}

}  // namespace pgibbs
