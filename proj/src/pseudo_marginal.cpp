#include "pgibbs/pseudo_marginal.hpp"

#include <algorithm>
#include <cmath>

namespace pgibbs {

void ObservationSet::validate() const {
    const int q = labels();
    if (q < 2 || loglik.cols() != loglik.rows())
        throw std::invalid_argument("ObservationSet: log-likelihood table must be q x q");
    if (!loglik.allFinite())
        throw std::invalid_argument("ObservationSet: log-likelihood entries must be finite");
    for (const auto& zs : obs)
        for (int z : zs)
            if (z < 0 || z >= q)
                throw std::invalid_argument("ObservationSet: observation outside label set");
}

ObservationSet ObservationSet::flip_noise(std::vector<std::vector<int>> obs, int q,
                                          double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("ObservationSet: delta must lie in (0,1)");
    if (q < 2) throw std::invalid_argument("ObservationSet: need at least two labels");
    Eigen::MatrixXd table(q, q);
    const double off = std::log(delta / static_cast<double>(q - 1));
    const double diag = std::log1p(-delta);
    table.setConstant(off);
    table.diagonal().setConstant(diag);
    ObservationSet z{std::move(obs), std::move(table)};
    z.validate();
    return z;
}

SubsampleVector SubsampleVector::prefix(const ObservationSet& z, const std::vector<int>& m) {
    SubsampleVector a;
    a.sets.resize(z.num_vertices());
    for (int v = 0; v < z.num_vertices(); ++v) {
        const int take = std::min(m[v], z.count(v));
        a.sets[v].resize(take);
        for (int j = 0; j < take; ++j) a.sets[v][j] = j;
    }
    return a;
}

double estimate_log_likelihood(const FactorGraph& g, FactorId phi, const Configuration& sigma,
                               const SubsampleVector& a, const ObservationSet& z) {
    if (phi.kind == FactorId::Kind::Prior) {
        if (phi.index < 0 || phi.index >= static_cast<int>(g.factors().size()))
            throw std::invalid_argument("estimate_log_likelihood: unknown prior factor");
        return g.factors()[phi.index].value(sigma, g.labels());
    }
    const int v = phi.index;
    if (v < 0 || v >= z.num_vertices())
        throw std::invalid_argument("estimate_log_likelihood: unknown observation factor");
    const int n = z.count(v);
    if (n == 0) return 0.0;
    const auto& subset = a.sets[v];
    if (subset.empty())
        throw std::invalid_argument("estimate_log_likelihood: empty subsample at observed vertex");
    double s = 0.0;
    for (int j : subset) s += z.loglik(sigma[v], z.obs[v][j]);
    return s * static_cast<double>(n) / static_cast<double>(subset.size());
}

Eigen::VectorXd estimated_site_conditional(const FactorGraph& g, const ObservationSet& z,
                                           const SubsampleVector& a, const Configuration& sigma,
                                           int vertex) {
    const int q = g.labels();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(q);
    Configuration probe = sigma;
    for (int i = 0; i < q; ++i) {
        probe[vertex] = i;
        double acc = 0.0;
        for (int fi : g.factors_at(vertex)) acc += g.factors()[fi].value(probe, q);
        const int n = z.count(vertex);
        if (n > 0) {
            const auto& subset = a.sets[vertex];
            if (subset.empty())
                throw std::invalid_argument("alternating_step: empty subsample at observed vertex");
            double est = 0.0;
            for (int j : subset) est += z.loglik(i, z.obs[vertex][j]);
            acc += est * static_cast<double>(n) / static_cast<double>(subset.size());
        }
        s[i] = acc;
    }
    const double top = s.maxCoeff();
    if (top == -std::numeric_limits<double>::infinity())
        throw std::domain_error("alternating_step: all labels excluded");
    Eigen::VectorXd p(q);
    for (int i = 0; i < q; ++i) p[i] = std::exp(s[i] - top);
    p /= p.sum();
    return p;
}

namespace {

double log_weight_of(const SubsampleLogWeight& weights, int vertex,
                     const std::vector<int>& subset) {
    return weights ? weights(vertex, subset) : 0.0;
}

// Swapped copy of `subset` with element `drop` replaced by `add`, re-sorted.
std::vector<int> swap_subset(const std::vector<int>& subset, int drop, int add) {
    std::vector<int> out = subset;
    *std::find(out.begin(), out.end(), drop) = add;
    std::sort(out.begin(), out.end());
    return out;
}

double estimate_obs_loglik(const ObservationSet& z, int vertex, int label,
                           const std::vector<int>& subset) {
    const int n = z.count(vertex);
    double s = 0.0;
    for (int j : subset) s += z.loglik(label, z.obs[vertex][j]);
    return s * static_cast<double>(n) / static_cast<double>(subset.size());
}

}  // namespace

int alternating_step_inplace(const FactorGraph& g, AugmentedState& state,
                             const ObservationSet& z, const SubsampleLogWeight& weights,
                             Rng& rng) {
    const int q = g.labels();
    Configuration& sigma = state.sigma;

    // Sigma phase: single-site update through the subsampled estimates.
    const int v = static_cast<int>(uniform_index(rng, g.num_vertices()));
    if (q > 16) {
        const Eigen::VectorXd p1 = estimated_site_conditional(g, z, state.a, sigma, v);
        sigma[v] = static_cast<int>(sample_discrete(rng, p1));
    } else {
        const int n_obs = z.count(v);
        const auto& subset = state.a.sets[v];
        if (n_obs > 0 && subset.empty())
            throw std::invalid_argument("alternating_step: empty subsample at observed vertex");
        const double inflate =
            n_obs > 0 ? static_cast<double>(n_obs) / static_cast<double>(subset.size()) : 0.0;
        double s[16];
        double top = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < q; ++i) {
            sigma[v] = i;
            double acc = 0.0;
            for (int fi : g.factors_at(v)) acc += g.factors()[fi].value(sigma, q);
            if (n_obs > 0) {
                double est = 0.0;
                for (int j : subset) est += z.loglik(i, z.obs[v][j]);
                acc += est * inflate;
            }
            s[i] = acc;
            top = std::max(top, acc);
        }
        if (top == -std::numeric_limits<double>::infinity())
            throw std::domain_error("alternating_step: all labels excluded");
        double w[16];
        double total = 0.0;
        for (int i = 0; i < q; ++i) {
            w[i] = std::exp(s[i] - top);
            total += w[i];
        }
        double u = uniform_real(rng) * total;
        int pick = q - 1;
        for (int i = 0; i < q; ++i) {
            u -= w[i];
            if (u < 0.0) {
                pick = i;
                break;
            }
        }
        sigma[v] = pick;
    }

    // Swap phase: propose exchanging one held index for one excluded index.
    const int vp = static_cast<int>(uniform_index(rng, g.num_vertices()));
    auto& held = state.a.sets[vp];
    const int n = z.count(vp);
    const int m = static_cast<int>(held.size());
    if (n == 0 || m == 0 || m == n) return v;  // nothing to swap

    const int drop_pos = static_cast<int>(uniform_index(rng, m));
    const int drop = held[drop_pos];
    int add = -1;
    {
        int excluded = static_cast<int>(uniform_index(rng, n - m));
        if (n <= 64) {
            std::uint64_t mask = 0;
            for (int j : held) mask |= std::uint64_t(1) << j;
            for (int j = 0; j < n; ++j) {
                if (!(mask >> j & 1) && excluded-- == 0) {
                    add = j;
                    break;
                }
            }
        } else {
            std::vector<char> in_set(n, 0);
            for (int j : held) in_set[j] = 1;
            for (int j = 0; j < n; ++j) {
                if (!in_set[j] && excluded-- == 0) {
                    add = j;
                    break;
                }
            }
        }
    }

    const double inflate = static_cast<double>(n) / static_cast<double>(m);
    const int label = sigma[vp];
    double delta_l = inflate * (z.loglik(label, z.obs[vp][add]) -
                                z.loglik(label, z.obs[vp][drop]));
    if (weights) {
        const std::vector<int> swapped = swap_subset(held, drop, add);
        delta_l += weights(vp, swapped) - weights(vp, held);
    }
    // p2(keep) = w1 / (w1 + w2) with log(w2/w1) = delta_l.
    const double p_swap = 1.0 / (1.0 + std::exp(-delta_l));
    if (uniform_real(rng) < p_swap) {
        held[drop_pos] = add;
        std::sort(held.begin(), held.end());
    }
    return v;
}

AugmentedState alternating_step(const FactorGraph& g, const AugmentedState& state,
                                const ObservationSet& z, const SubsampleLogWeight& weights,
                                Rng& rng) {
    AugmentedState next = state;
    alternating_step_inplace(g, next, z, weights, rng);
    return next;
}

FactorGraph with_exact_observations(const FactorGraph& g, const ObservationSet& z) {
    if (z.num_vertices() != g.num_vertices() || z.labels() != g.labels())
        throw std::invalid_argument("with_exact_observations: observation set does not match graph");
    std::vector<Factor> factors = g.factors();
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (z.count(v) == 0) continue;
        Eigen::VectorXd table(g.labels());
        for (int i = 0; i < g.labels(); ++i) table[i] = z.exact_vertex_loglik(v, i);
        factors.push_back(Factor{{v}, std::move(table)});
    }
    return FactorGraph(g.num_vertices(), g.labels(), std::move(factors), g.edges(),
                       g.vertex_names());
}

std::vector<std::vector<int>> size_m_subsets(int n, int m) {
    if (m < 0 || m > n) throw std::invalid_argument("size_m_subsets: need 0 <= m <= n");
    std::vector<std::vector<int>> out;
    if (m == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> cur(m);
    for (int j = 0; j < m; ++j) cur[j] = j;
    for (;;) {
        out.push_back(cur);
        int pos = m - 1;
        while (pos >= 0 && cur[pos] == n - m + pos) --pos;
        if (pos < 0) break;
        ++cur[pos];
        for (int j = pos + 1; j < m; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

SubsampleSpace::SubsampleSpace(const ObservationSet& z, const std::vector<int>& m) {
    if (static_cast<int>(m.size()) != z.num_vertices())
        throw std::invalid_argument("SubsampleSpace: subsample size list does not match graph");
    subsets_.resize(z.num_vertices());
    size_ = 1;
    for (int v = 0; v < z.num_vertices(); ++v) {
        const int n = z.count(v);
        const int mv = std::min(m[v], n);
        if (n > 0 && mv < 1)
            throw std::invalid_argument("SubsampleSpace: need subsample size >= 1");
        subsets_[v] = size_m_subsets(n, mv);
        if (size_ > SIZE_MAX / subsets_[v].size())
            throw std::overflow_error("SubsampleSpace: size overflows");
        size_ *= subsets_[v].size();
    }
}

std::size_t SubsampleSpace::encode(const SubsampleVector& a) const {
    std::size_t idx = 0;
    for (std::size_t v = 0; v < subsets_.size(); ++v) {
        const auto& list = subsets_[v];
        const auto it = std::lower_bound(list.begin(), list.end(), a.sets[v]);
        if (it == list.end() || *it != a.sets[v])
            throw std::invalid_argument("SubsampleSpace: subset not in enumeration");
        idx = idx * list.size() + static_cast<std::size_t>(it - list.begin());
    }
    return idx;
}

SubsampleVector SubsampleSpace::decode(std::size_t index) const {
    SubsampleVector a;
    a.sets.resize(subsets_.size());
    for (std::size_t v = subsets_.size(); v-- > 0;) {
        const auto& list = subsets_[v];
        a.sets[v] = list[index % list.size()];
        index /= list.size();
    }
    return a;
}

namespace {

struct AugmentedIndexing {
    ProductSpace space;
    SubsampleSpace subs;
    std::size_t omega_size;
    std::size_t total;
};

AugmentedIndexing make_indexing(const FactorGraph& g, const ObservationSet& z,
                                const std::vector<int>& m, std::size_t cap, const char* what) {
    if (z.num_vertices() != g.num_vertices() || z.labels() != g.labels())
        throw std::invalid_argument(std::string(what) + ": observation set does not match graph");
    const std::size_t omega = checked_pow(g.labels(), g.num_vertices(), cap, what);
    SubsampleSpace subs(z, m);
    if (omega > cap / subs.size())
        throw BudgetError(std::string(what) + ": augmented space over cap", cap,
                          omega * subs.size());
    return {g.space(), std::move(subs), omega, omega * subs.size()};
}

}  // namespace

ExactTargets exact_targets(const FactorGraph& g, const ObservationSet& z,
                           const SubsampleLogWeight& weights, const std::vector<int>& m,
                           std::size_t cap) {
    const AugmentedIndexing ix = make_indexing(g, z, m, cap, "exact_targets");

    Eigen::VectorXd logw(static_cast<Eigen::Index>(ix.total));
    Configuration sigma;
    for (std::size_t s = 0; s < ix.omega_size; ++s) {
        ix.space.decode_into(s, sigma);
        double prior = 0.0;
        for (const Factor& f : g.factors()) prior += f.value(sigma, g.labels());
        for (std::size_t t = 0; t < ix.subs.size(); ++t) {
            const SubsampleVector a = ix.subs.decode(t);
            double acc = prior;
            for (int v = 0; v < g.num_vertices(); ++v) {
                if (z.count(v) == 0) continue;
                acc += estimate_obs_loglik(z, v, sigma[v], a.sets[v]);
                acc += log_weight_of(weights, v, a.sets[v]);
            }
            logw[static_cast<Eigen::Index>(s * ix.subs.size() + t)] = acc;
        }
    }
    DenseDistribution augmented = DenseDistribution::from_log_weights(logw);

    Eigen::VectorXd marg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ix.omega_size));
    for (std::size_t s = 0; s < ix.omega_size; ++s)
        for (std::size_t t = 0; t < ix.subs.size(); ++t)
            marg[static_cast<Eigen::Index>(s)] +=
                augmented[static_cast<Eigen::Index>(s * ix.subs.size() + t)];
    return {std::move(augmented), DenseDistribution::from_unnormalized(std::move(marg))};
}

Eigen::VectorXd sigma_phase_row(const FactorGraph& g, const ObservationSet& z,
                                const SubsampleVector& a, const Configuration& sigma) {
    const ProductSpace space = g.space();
    const int q = g.labels();
    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    const double site_prob = 1.0 / static_cast<double>(g.num_vertices());
    const std::size_t s = space.encode(sigma);
    for (int v = 0; v < g.num_vertices(); ++v) {
        const Eigen::VectorXd p1 = estimated_site_conditional(g, z, a, sigma, v);
        std::size_t stride = 1;
        for (int w = g.num_vertices() - 1; w > v; --w) stride *= q;
        const std::size_t base = s - static_cast<std::size_t>(sigma[v]) * stride;
        for (int i = 0; i < q; ++i)
            row[static_cast<Eigen::Index>(base + i * stride)] += site_prob * p1[i];
    }
    return row;
}

StochasticKernel alternating_kernel(const FactorGraph& g, const ObservationSet& z,
                                    const SubsampleLogWeight& weights, const std::vector<int>& m,
                                    std::size_t cap) {
    const AugmentedIndexing ix = make_indexing(g, z, m, cap, "alternating_kernel");
    const Eigen::Index total = static_cast<Eigen::Index>(ix.total);
    const int q = g.labels();
    const double site_prob = 1.0 / static_cast<double>(g.num_vertices());

    Eigen::MatrixXd sigma_phase = Eigen::MatrixXd::Zero(total, total);
    Eigen::MatrixXd swap_phase = Eigen::MatrixXd::Zero(total, total);

    Configuration sigma;
    for (std::size_t s = 0; s < ix.omega_size; ++s) {
        ix.space.decode_into(s, sigma);
        for (std::size_t t = 0; t < ix.subs.size(); ++t) {
            const SubsampleVector a = ix.subs.decode(t);
            const Eigen::Index from = static_cast<Eigen::Index>(s * ix.subs.size() + t);

            // Sigma phase: single-site label updates, subsample unchanged.
            for (int v = 0; v < g.num_vertices(); ++v) {
                const Eigen::VectorXd p1 = estimated_site_conditional(g, z, a, sigma, v);
                std::size_t stride = 1;
                for (int w = g.num_vertices() - 1; w > v; --w) stride *= q;
                const std::size_t base = s - static_cast<std::size_t>(sigma[v]) * stride;
                for (int i = 0; i < q; ++i) {
                    const std::size_t to = (base + i * stride) * ix.subs.size() + t;
                    sigma_phase(from, static_cast<Eigen::Index>(to)) += site_prob * p1[i];
                }
            }

            // Swap phase: one proposed exchange in one vertex's subsample.
            for (int vp = 0; vp < g.num_vertices(); ++vp) {
                const auto& held = a.sets[vp];
                const int n = z.count(vp);
                const int mv = static_cast<int>(held.size());
                if (n == 0 || mv == 0 || mv == n) {
                    swap_phase(from, from) += site_prob;
                    continue;
                }
                const double pair_prob =
                    site_prob / (static_cast<double>(mv) * static_cast<double>(n - mv));
                std::vector<char> in_set(n, 0);
                for (int j : held) in_set[j] = 1;
                for (int drop : held) {
                    for (int add = 0; add < n; ++add) {
                        if (in_set[add]) continue;
                        const std::vector<int> swapped = swap_subset(held, drop, add);
                        const double l1 = estimate_obs_loglik(z, vp, sigma[vp], held);
                        const double l2 = estimate_obs_loglik(z, vp, sigma[vp], swapped);
                        const double w1 = log_weight_of(weights, vp, held) + l1;
                        const double w2 = log_weight_of(weights, vp, swapped) + l2;
                        const double top = std::max(w1, w2);
                        const double e1 = std::exp(w1 - top);
                        const double e2 = std::exp(w2 - top);
                        const double accept = e2 / (e1 + e2);
                        SubsampleVector b = a;
                        b.sets[vp] = swapped;
                        const Eigen::Index to =
                            static_cast<Eigen::Index>(s * ix.subs.size() + ix.subs.encode(b));
                        swap_phase(from, to) += pair_prob * accept;
                        swap_phase(from, from) += pair_prob * (1.0 - accept);
                    }
                }
            }
        }
    }
    return StochasticKernel(sigma_phase * swap_phase);
}

double perturbation_sup(const FactorGraph& g, const ObservationSet& z,
                        const SubsampleLogWeight& weights, const std::vector<int>& m,
                        const Metric& metric, std::size_t cap) {
    (void)weights;  // the sigma-phase law does not depend on g_v
    const AugmentedIndexing ix = make_indexing(g, z, m, cap, "perturbation_sup");
    const StochasticKernel exact = gibbs_kernel(with_exact_observations(g, z), cap);

    double sup = 0.0;
    Configuration sigma;
    for (std::size_t s = 0; s < ix.omega_size; ++s) {
        ix.space.decode_into(s, sigma);
        for (std::size_t t = 0; t < ix.subs.size(); ++t) {
            const SubsampleVector a = ix.subs.decode(t);
            const Eigen::VectorXd row = sigma_phase_row(g, z, a, sigma);
            sup = std::max(sup, metric(exact.row(static_cast<Eigen::Index>(s)), row));
        }
    }
    return sup;
}

}  // namespace pgibbs
