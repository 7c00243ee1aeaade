#include "pgibbs/gibbs.hpp"

#include <cmath>
#include <limits>

namespace pgibbs {

Eigen::VectorXd site_conditional(const FactorGraph& g, const Configuration& sigma, int vertex) {
    const int q = g.labels();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(q);
    Configuration probe = sigma;
    for (int i = 0; i < q; ++i) {
        probe[vertex] = i;
        double acc = 0.0;
        for (int fi : g.factors_at(vertex)) acc += g.factors()[fi].value(probe, q);
        s[i] = acc;
    }
    const double top = s.maxCoeff();
    if (top == -std::numeric_limits<double>::infinity())
        throw std::domain_error("site_conditional: all labels excluded by hard constraints");
    Eigen::VectorXd p(q);
    for (int i = 0; i < q; ++i) p[i] = std::exp(s[i] - top);  // exact zero at -inf
    p /= p.sum();
    return p;
}

int gibbs_step_inplace(const FactorGraph& g, Configuration& sigma, Rng& rng) {
    const int q = g.labels();
    const int x = static_cast<int>(uniform_index(rng, g.num_vertices()));
    if (q > 16) {  // rare: fall back to the allocating path
        const Eigen::VectorXd p = site_conditional(g, sigma, x);
        sigma[x] = static_cast<int>(sample_discrete(rng, p));
        return x;
    }
    double s[16];
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < q; ++i) {
        sigma[x] = i;
        double acc = 0.0;
        for (int fi : g.factors_at(x)) acc += g.factors()[fi].value(sigma, q);
        s[i] = acc;
        top = std::max(top, acc);
    }
    if (top == -std::numeric_limits<double>::infinity())
        throw std::domain_error("site_conditional: all labels excluded by hard constraints");
    double w[16];
    double total = 0.0;
    for (int i = 0; i < q; ++i) {
        w[i] = std::exp(s[i] - top);
        total += w[i];
    }
    double u = uniform_real(rng) * total;
    int j = q - 1;
    for (int i = 0; i < q; ++i) {
        u -= w[i];
        if (u < 0.0) {
            j = i;
            break;
        }
    }
    sigma[x] = j;
    return x;
}

Configuration gibbs_step(const FactorGraph& g, const Configuration& sigma, Rng& rng) {
    Configuration next = sigma;
    gibbs_step_inplace(g, next, rng);
    return next;
}

namespace {

constexpr std::size_t kDenseKernelCap = std::size_t(1) << 15;

StochasticKernel site_update_kernel(const FactorGraph& g, const std::vector<int>& sites,
                                    std::size_t enumeration_cap) {
    const std::size_t cap = std::min(enumeration_cap, kDenseKernelCap);
    const std::size_t size = checked_pow(g.labels(), g.num_vertices(), cap, "gibbs_kernel");
    if (size > cap) throw BudgetError("gibbs_kernel: state space over cap", cap, size);
    const ProductSpace space = g.space();
    const int q = g.labels();
    const Eigen::Index n = static_cast<Eigen::Index>(size);

    if (sites.empty()) return StochasticKernel::identity(n);

    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n, n);
    const double site_prob = 1.0 / static_cast<double>(sites.size());
    Configuration sigma;
    for (std::size_t s = 0; s < size; ++s) {
        space.decode_into(s, sigma);
        for (int x : sites) {
            const Eigen::VectorXd p = site_conditional(g, sigma, x);
            // Stride of vertex x in the row-major state index.
            std::size_t stride = 1;
            for (int v = g.num_vertices() - 1; v > x; --v) stride *= q;
            const std::size_t base = s - static_cast<std::size_t>(sigma[x]) * stride;
            for (int j = 0; j < q; ++j)
                rows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(base + j * stride)) +=
                    site_prob * p[j];
        }
    }
    return StochasticKernel(std::move(rows));
}

}  // namespace

StochasticKernel gibbs_kernel(const FactorGraph& g, std::size_t enumeration_cap) {
    std::vector<int> all(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) all[v] = v;
    return site_update_kernel(g, all, enumeration_cap);
}

StochasticKernel restricted_kernel(const FactorGraph& g, const std::vector<int>& b,
                                   std::size_t enumeration_cap) {
    for (int v : b)
        if (v < 0 || v >= g.num_vertices())
            throw std::invalid_argument("restricted_kernel: vertex outside graph");
    return site_update_kernel(g, b, enumeration_cap);
}

}  // namespace pgibbs
