#include "pgibbs/tree_ising.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "pgibbs/gibbs.hpp"

namespace pgibbs {

int tree_vertex_count(int depth) {
    if (depth < 0 || depth > 24)
        throw std::invalid_argument("tree_vertex_count: depth out of range");
    return (1 << (depth + 1)) - 1;
}

namespace {

std::vector<int> tree_children(int v, int n) {
    std::vector<int> out;
    if (2 * v + 1 < n) out.push_back(2 * v + 1);
    if (2 * v + 2 < n) out.push_back(2 * v + 2);
    return out;
}

Factor ising_edge_factor(int u, int v, double beta) {
    Eigen::VectorXd table(4);
    for (int lu = 0; lu < 2; ++lu)
        for (int lv = 0; lv < 2; ++lv)
            table[lu * 2 + lv] = beta * spin_of(lu) * spin_of(lv);
    return Factor{{u, v}, std::move(table)};
}

}  // namespace

FactorGraph tree_prior_graph(int depth, double beta) {
    const int n = tree_vertex_count(depth);
    std::vector<Factor> factors;
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) {
        const int u = tree_parent(v);
        edges.emplace_back(u, v);
        factors.push_back(ising_edge_factor(u, v, beta));
    }
    return FactorGraph(n, 2, std::move(factors), std::move(edges));
}

FactorGraph tree_posterior_graph(int depth, double beta, const ObservationSet& z) {
    return with_exact_observations(tree_prior_graph(depth, beta), z);
}

FactorizationStructure tree_blocks(int depth) {
    const int n = tree_vertex_count(depth);
    FactorizationStructure fs;
    fs.blocks.reserve(n);
    // Heap order is breadth-first, so parents precede children.
    for (int v = 0; v < n; ++v) {
        FactorizationStructure::Block b;
        b.s = {v};
        if (v > 0) b.pi = {tree_parent(v)};
        fs.blocks.push_back(std::move(b));
    }
    return fs;
}

TreeSample generate(int depth, double beta, double delta, const std::vector<int>& counts,
                    std::uint64_t seed) {
    const int n = tree_vertex_count(depth);
    if (static_cast<int>(counts.size()) != n)
        throw std::invalid_argument("generate: counts list does not match tree size");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("generate: delta must lie in (0, 1/2)");

    Rng rng = make_stream(seed, 0);
    TreeSample out;
    out.sigma_true.resize(n);

    // Root marginal is uniform; every child keeps the parent spin with
    // probability e^beta / (e^beta + e^-beta). Exact on the tree because the
    // subtree partition functions below a child are spin-symmetric.
    const double p_same = std::exp(beta) / (std::exp(beta) + std::exp(-beta));
    out.sigma_true[0] = static_cast<int>(uniform_index(rng, 2));
    for (int v = 1; v < n; ++v) {
        const int par = out.sigma_true[tree_parent(v)];
        out.sigma_true[v] = uniform_real(rng) < p_same ? par : 1 - par;
    }

    std::vector<std::vector<int>> obs(n);
    for (int v = 0; v < n; ++v) {
        obs[v].resize(counts[v]);
        for (int j = 0; j < counts[v]; ++j) {
            const int truth = out.sigma_true[v];
            obs[v][j] = uniform_real(rng) < delta ? 1 - truth : truth;
        }
    }
    out.z = ObservationSet::flip_noise(std::move(obs), 2, delta);
    return out;
}

double decay_threshold_beta() { return std::log(2.0) / 6.0; }

std::vector<int> leftmost_path(int depth) {
    std::vector<int> path(depth + 1);
    path[0] = 0;
    for (int t = 1; t <= depth; ++t) path[t] = 2 * path[t - 1] + 1;
    return path;
}

namespace {

double lse2(double a, double b) {
    const double top = std::max(a, b);
    return top + std::log(std::exp(a - top) + std::exp(b - top));
}

// Upward pass: U[v][l] = h_v(l) + sum over children of the log-sum over the
// child label of (beta spin spin + U[child]).
std::vector<std::array<double, 2>> upward_messages(int n, double beta, const ObservationSet& z) {
    std::vector<std::array<double, 2>> up(n);
    for (int v = n - 1; v >= 0; --v) {
        for (int l = 0; l < 2; ++l) {
            double acc = z.count(v) > 0 ? z.exact_vertex_loglik(v, l) : 0.0;
            for (int c : tree_children(v, n)) {
                const double e0 = beta * spin_of(l) * spin_of(0) + up[c][0];
                const double e1 = beta * spin_of(l) * spin_of(1) + up[c][1];
                acc += lse2(e0, e1);
            }
            up[v][l] = acc;
        }
    }
    return up;
}

void validate_path(int n, const std::vector<int>& path) {
    if (path.empty() || path[0] != 0)
        throw std::invalid_argument("path must start at the root");
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
        const int c = path[t + 1];
        if (c >= n || (c != 2 * path[t] + 1 && c != 2 * path[t] + 2))
            throw std::invalid_argument("path must follow parent-child edges");
    }
}

}  // namespace

DenseDistribution path_tail_law(int depth, double beta, const ObservationSet& z,
                                const std::vector<int>& path, std::size_t j, int root_label) {
    const int n = tree_vertex_count(depth);
    if (z.num_vertices() != n)
        throw std::invalid_argument("path_tail_law: observations do not match tree");
    validate_path(n, path);
    const std::size_t k = path.size();
    if (j < 1 || j > k) throw std::invalid_argument("path_tail_law: position out of range");
    if (k > 24) throw BudgetError("path_tail_law: path too long", 24, k);

    const auto up = upward_messages(n, beta, z);

    // Per path vertex: own field plus the summed-out off-path subtrees.
    std::vector<std::array<double, 2>> site(k);
    std::vector<char> on_path(n, 0);
    for (int v : path) on_path[v] = 1;
    for (std::size_t t = 0; t < k; ++t) {
        const int v = path[t];
        for (int l = 0; l < 2; ++l) {
            double acc = z.count(v) > 0 ? z.exact_vertex_loglik(v, l) : 0.0;
            for (int c : tree_children(v, n)) {
                if (on_path[c]) continue;
                const double e0 = beta * spin_of(l) * spin_of(0) + up[c][0];
                const double e1 = beta * spin_of(l) * spin_of(1) + up[c][1];
                acc += lse2(e0, e1);
            }
            site[t][l] = acc;
        }
    }

    // Joint law of the free path labels given the root clamp, then the
    // marginal over positions j..k (row-major over the tail).
    const std::size_t free = k - 1;
    const std::size_t tail = k - j + 1;
    Eigen::VectorXd tail_logw =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(std::size_t(1) << tail),
                                  -std::numeric_limits<double>::infinity());
    std::vector<int> labels(k);
    labels[0] = root_label;
    for (std::size_t mask = 0; mask < (std::size_t(1) << free); ++mask) {
        for (std::size_t t = 1; t < k; ++t) labels[t] = (mask >> (t - 1)) & 1;
        double w = site[0][labels[0]];
        for (std::size_t t = 1; t < k; ++t) {
            w += site[t][labels[t]];
            w += beta * spin_of(labels[t - 1]) * spin_of(labels[t]);
        }
        std::size_t tail_idx = 0;
        for (std::size_t t = j - 1; t < k; ++t) tail_idx = tail_idx * 2 + labels[t];
        auto& slot = tail_logw[static_cast<Eigen::Index>(tail_idx)];
        slot = lse2(slot, w);
    }
    return DenseDistribution::from_log_weights(tail_logw);
}

std::vector<PathDecayPoint> path_decay_check(int depth, double beta, const ObservationSet& z,
                                             const std::vector<int>& path) {
    const double eps_beta = std::exp(-6.0 * beta);
    std::vector<PathDecayPoint> out;
    for (std::size_t j = 1; j <= path.size(); ++j) {
        const DenseDistribution plus = path_tail_law(depth, beta, z, path, j, 0);
        const DenseDistribution minus = path_tail_law(depth, beta, z, path, j, 1);
        PathDecayPoint pt;
        pt.position = static_cast<int>(j);
        pt.exact_tv = tv_distance(plus, minus);
        pt.bound = std::pow(1.0 - eps_beta, static_cast<double>(j - 1));
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling study
// ---------------------------------------------------------------------------

namespace {

std::uint64_t sub_id(int depth, int kind, std::size_t replica) {
    return (static_cast<std::uint64_t>(depth) << 40) |
           (static_cast<std::uint64_t>(kind) << 32) | static_cast<std::uint64_t>(replica);
}

int block_cell(const Configuration& sigma, int v) {
    return v == 0 ? sigma[0] : sigma[tree_parent(v)] * 2 + sigma[v];
}

using Tally = std::vector<std::array<double, 4>>;

// Advance `steps` counted steps; occupancy is accumulated per block with
// change-time bookkeeping so each step costs O(changed blocks).
template <typename Step>
void run_counted(Step&& step, const Configuration& sigma, int n, Tally& out,
                 std::size_t steps) {
    std::vector<int> cell(n);
    std::vector<std::size_t> last(n, 0);
    for (int v = 0; v < n; ++v) cell[v] = block_cell(sigma, v);
    for (std::size_t t = 1; t <= steps; ++t) {
        const int x = step();
        const int touched[3] = {x, 2 * x + 1, 2 * x + 2};
        for (int b : touched) {
            if (b >= n) break;
            const int now = block_cell(sigma, b);
            if (now != cell[b]) {
                out[b][cell[b]] += static_cast<double>(t - 1 - last[b]);
                cell[b] = now;
                last[b] = t - 1;
            }
        }
    }
    for (int v = 0; v < n; ++v) out[v][cell[v]] += static_cast<double>(steps - last[v]);
}

// Squared Hellinger distance between two smoothed count vectors.
double hell2_counts(const std::array<double, 4>& a, const std::array<double, 4>& b, int cells) {
    double ta = 0.0, tb = 0.0;
    for (int c = 0; c < cells; ++c) {
        ta += a[c] + 0.5;
        tb += b[c] + 0.5;
    }
    double h2 = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double pa = (a[c] + 0.5) / ta;
        const double pb = (b[c] + 0.5) / tb;
        const double d = std::sqrt(pa) - std::sqrt(pb);
        h2 += d * d;
    }
    return h2;
}

struct HalfTallies {
    Tally h1, h2;
};

// Block-aggregated squared-Hellinger signal between two chains, with the
// split-half sampling noise subtracted from every block. Signed square root:
// a zero true gap fluctuates around zero instead of folding into a positive
// floor that grows with the block count.
double debiased_upper(const HalfTallies& mu, const HalfTallies& nu, int n) {
    double total = 0.0;
    for (int v = 0; v < n; ++v) {
        const int cells = v == 0 ? 2 : 4;
        std::array<double, 4> mu_full{}, nu_full{};
        for (int c = 0; c < 4; ++c) {
            mu_full[c] = mu.h1[v][c] + mu.h2[v][c];
            nu_full[c] = nu.h1[v][c] + nu.h2[v][c];
        }
        const double cross = hell2_counts(mu_full, nu_full, cells);
        const double mu_noise = hell2_counts(mu.h1[v], mu.h2[v], cells);
        const double nu_noise = hell2_counts(nu.h1[v], nu.h2[v], cells);
        total += cross - 0.25 * (mu_noise + nu_noise);
    }
    return total >= 0.0 ? std::sqrt(total) : -std::sqrt(-total);
}

// Mean over sites of the worst-case TV between the exact and the estimated
// single-site update law, maximized over neighbour labels and subsamples.
double per_site_proxy(const FactorGraph& prior, const FactorGraph& posterior,
                      const ObservationSet& z, const std::vector<int>& m) {
    const int n = prior.num_vertices();
    double acc = 0.0;
    SubsampleVector a;
    a.sets.resize(n);
    for (int v = 0; v < n; ++v) {
        const auto& nbrs = prior.neighbours(v);
        const auto subsets = size_m_subsets(z.count(v), std::min(m[v], z.count(v)));
        double worst = 0.0;
        Configuration probe(n, 0);
        const std::size_t combos = std::size_t(1) << nbrs.size();
        for (std::size_t mask = 0; mask < combos; ++mask) {
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                probe[nbrs[i]] = static_cast<int>((mask >> i) & 1);
            const Eigen::VectorXd exact = site_conditional(posterior, probe, v);
            for (const auto& subset : subsets) {
                a.sets[v] = subset;
                const Eigen::VectorXd est = estimated_site_conditional(prior, z, a, probe, v);
                worst = std::max(worst, 0.5 * (exact - est).cwiseAbs().sum());
            }
        }
        acc += worst;
    }
    return acc / static_cast<double>(n);
}

}  // namespace

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_slope: need matching series of length >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) throw std::invalid_argument("linear_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

ScalingStudy scaling_study(const ScalingOptions& opts) {
    if (opts.depths.empty()) throw std::invalid_argument("scaling_study: no depths");
    if (opts.replicas < 2) throw std::invalid_argument("scaling_study: need >= 2 replicas");
    if (!(opts.burn_in_fraction >= 0.0 && opts.burn_in_fraction < 1.0))
        throw std::invalid_argument("scaling_study: burn-in fraction out of range");

    ScalingStudy study;
    for (std::size_t di = 0; di < opts.depths.size(); ++di) {
        const int depth = opts.depths[di];
        int m_value;
        if (opts.subsample_m.size() == 1) {
            m_value = opts.subsample_m[0];
        } else if (opts.subsample_m.size() == opts.depths.size()) {
            m_value = opts.subsample_m[di];
        } else {
            throw std::invalid_argument("scaling_study: subsample list does not match depths");
        }
        m_value = std::clamp(m_value, 1, opts.obs_per_vertex);

        try {
            const int n = tree_vertex_count(depth);
            const std::vector<int> counts(n, opts.obs_per_vertex);
            const std::vector<int> m(n, m_value);
            const TreeSample data =
                generate(depth, opts.beta, opts.delta, counts,
                         splitmix64(opts.seed ^ splitmix64(sub_id(depth, 0, 0))));
            const FactorGraph prior = tree_prior_graph(depth, opts.beta);
            const FactorGraph posterior = with_exact_observations(prior, data.z);

            ScalingRecord rec;
            rec.depth = depth;
            rec.gamma = n;
            rec.subsample_m = m_value;

            // Exact sup over the augmented space when it is enumerable (the
            // exact-sampler rows also need a dense kernel over Omega),
            // otherwise the per-site worst-case proxy.
            double log_aug = n * std::log2(2.0);
            for (int v = 0; v < n; ++v)
                log_aug += std::log2(static_cast<double>(
                    size_m_subsets(data.z.count(v), std::min(m_value, data.z.count(v))).size()));
            if (n <= 12 && log_aug <= std::log2(static_cast<double>(opts.augmented_cap))) {
                rec.perturbation_proxy =
                    perturbation_sup(prior, data.z, nullptr, m, Metric::tv(),
                                     opts.augmented_cap);
                rec.proxy_exact = true;
            } else {
                rec.perturbation_proxy = per_site_proxy(prior, posterior, data.z, m);
                rec.proxy_exact = false;
            }

            const std::size_t burn =
                static_cast<std::size_t>(static_cast<double>(opts.steps) * opts.burn_in_fraction);
            const std::size_t half = (opts.steps - burn) / 2;
            if (half < 10) throw std::invalid_argument("scaling_study: too few steps");

            rec.replica_uppers.assign(opts.replicas, 0.0);
            std::atomic<std::size_t> next{0};
            auto worker = [&]() {
                for (;;) {
                    const std::size_t r = next.fetch_add(1);
                    if (r >= opts.replicas) return;

                    HalfTallies mu_t{Tally(n, {0, 0, 0, 0}), Tally(n, {0, 0, 0, 0})};
                    HalfTallies nu_t{Tally(n, {0, 0, 0, 0}), Tally(n, {0, 0, 0, 0})};

                    Rng rng_mu = make_stream(opts.seed, sub_id(depth, 1, r));
                    Configuration sig(n, 0);
                    for (std::size_t t = 0; t < burn; ++t) gibbs_step_inplace(posterior, sig, rng_mu);
                    auto mu_step = [&]() { return gibbs_step_inplace(posterior, sig, rng_mu); };
                    run_counted(mu_step, sig, n, mu_t.h1, half);
                    run_counted(mu_step, sig, n, mu_t.h2, half);

                    Rng rng_nu = make_stream(opts.seed, sub_id(depth, 2, r));
                    AugmentedState st{Configuration(n, 0), SubsampleVector::prefix(data.z, m)};
                    for (std::size_t t = 0; t < burn; ++t)
                        alternating_step_inplace(prior, st, data.z, nullptr, rng_nu);
                    auto nu_step = [&]() {
                        return alternating_step_inplace(prior, st, data.z, nullptr, rng_nu);
                    };
                    run_counted(nu_step, st.sigma, n, nu_t.h1, half);
                    run_counted(nu_step, st.sigma, n, nu_t.h2, half);

                    rec.replica_uppers[r] = debiased_upper(mu_t, nu_t, n);
                }
            };

            unsigned hw = std::thread::hardware_concurrency();
            if (hw == 0) hw = 1;
            const unsigned threads = std::min<std::size_t>(
                opts.threads > 0 ? static_cast<unsigned>(opts.threads) : hw, opts.replicas);
            if (threads <= 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
                for (auto& th : pool) th.join();
            }

            double mean = 0.0;
            for (double u : rec.replica_uppers) mean += u;
            mean /= static_cast<double>(opts.replicas);
            double var = 0.0;
            for (double u : rec.replica_uppers) var += (u - mean) * (u - mean);
            var /= static_cast<double>(opts.replicas - 1);
            rec.hellinger_upper = mean;
            rec.std_error = std::sqrt(var / static_cast<double>(opts.replicas));

            study.records.push_back(std::move(rec));
        } catch (const BudgetError& e) {
            study.skipped.emplace_back(depth, e.what());
        }
    }
    return study;
}

}  // namespace pgibbs
