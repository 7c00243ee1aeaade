#include "pgibbs/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace pgibbs {

namespace {

struct RowSplit {
    double delta;
    Eigen::VectorXd overlap;
    Eigen::VectorXd residual_x;
    Eigen::VectorXd residual_y;
};

RowSplit split_rows(const Eigen::VectorXd& px, const Eigen::VectorXd& py) {
    RowSplit out;
    Eigen::VectorXd overlap = px.cwiseMin(py);
    const double delta = overlap.sum();
    out.delta = delta;
    out.overlap = delta > 0.0 ? Eigen::VectorXd(overlap / delta) : overlap;
    Eigen::VectorXd rx = (px - py).cwiseMax(0.0);
    Eigen::VectorXd ry = (py - px).cwiseMax(0.0);
    const double tv = rx.sum();
    if (tv > 0.0) {
        rx /= tv;
        ry /= ry.sum();
    }
    out.residual_x = std::move(rx);
    out.residual_y = std::move(ry);
    return out;
}

std::pair<Eigen::Index, Eigen::Index> coupled_draw(const RowSplit& split, Rng& rng) {
    if (uniform_real(rng) < split.delta) {
        const Eigen::Index z = sample_discrete(rng, split.overlap);
        return {z, z};
    }
    const Eigen::Index nx = sample_discrete(rng, split.residual_x);
    const Eigen::Index ny = sample_discrete(rng, split.residual_y);
    return {nx, ny};
}

}  // namespace

std::pair<Eigen::Index, Eigen::Index> greedy_coupled_step(const StochasticKernel& K,
                                                          Eigen::Index x, Eigen::Index y,
                                                          Rng& rng) {
    if (x < 0 || x >= K.size() || y < 0 || y >= K.size())
        throw std::invalid_argument("greedy_coupled_step: state outside kernel");
    if (x == y) {
        const Eigen::Index z = sample_discrete(rng, K.row(x));
        return {z, z};
    }
    const RowSplit split = split_rows(K.row(x), K.row(y));
    return coupled_draw(split, rng);
}

const GreedyCoupling::Decomposition& GreedyCoupling::decomposition(Eigen::Index x,
                                                                   Eigen::Index y) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint64_t>(y);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        RowSplit split = split_rows(kernel_.row(x), kernel_.row(y));
        it = cache_
                 .emplace(key, Decomposition{split.delta, std::move(split.overlap),
                                             std::move(split.residual_x),
                                             std::move(split.residual_y)})
                 .first;
    }
    return it->second;
}

std::pair<Eigen::Index, Eigen::Index> GreedyCoupling::step(Eigen::Index x, Eigen::Index y,
                                                           Rng& rng) {
    if (x == y) {
        const Eigen::Index z = sample_discrete(rng, kernel_.row(x));
        return {z, z};
    }
    const Decomposition& d = decomposition(x, y);
    if (uniform_real(rng) < d.delta) {
        const Eigen::Index z = sample_discrete(rng, d.overlap);
        return {z, z};
    }
    const Eigen::Index nx = sample_discrete(rng, d.residual_x);
    const Eigen::Index ny = sample_discrete(rng, d.residual_y);
    return {nx, ny};
}

std::vector<double> coupling_tail(const StochasticKernel& K, Eigen::Index x, Eigen::Index y,
                                  std::size_t t_max, std::size_t replicas, Rng& rng) {
    if (replicas < 1) throw std::invalid_argument("coupling_tail: need at least one replica");
    std::vector<std::size_t> alive(t_max + 1, 0);
    GreedyCoupling coupling(K);
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        Eigen::Index cx = x;
        Eigen::Index cy = y;
        // tau > t counts: tau = min{t : X_t = Y_t} with X_0 = x, Y_0 = y.
        for (std::size_t t = 0; t <= t_max; ++t) {
            if (cx == cy) break;
            ++alive[t];
            if (t == t_max) break;
            std::tie(cx, cy) = coupling.step(cx, cy, rng);
        }
    }
    std::vector<double> survival(t_max + 1);
    for (std::size_t t = 0; t <= t_max; ++t)
        survival[t] = static_cast<double>(alive[t]) / static_cast<double>(replicas);
    return survival;
}

namespace {

// All block conditionals under every clamp of `outside`, via one pass over
// the state space: table[clamp_index][block_index].
std::vector<Eigen::VectorXd> clamp_conditionals(const DenseDistribution& mu,
                                                const ProductSpace& space,
                                                const std::vector<int>& block,
                                                const std::vector<int>& outside) {
    const std::size_t num_clamps =
        checked_pow(space.labels(), outside.size(), SIZE_MAX, "decay_estimate");
    const std::size_t block_size =
        checked_pow(space.labels(), block.size(), SIZE_MAX, "decay_estimate");
    std::vector<Eigen::VectorXd> table(
        num_clamps, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(block_size)));
    Configuration sigma;
    for (std::size_t s = 0; s < space.size(); ++s) {
        space.decode_into(s, sigma);
        table[space.encode_subset(sigma, outside)]
             [static_cast<Eigen::Index>(space.encode_subset(sigma, block))] += mu[s];
    }
    for (auto& row : table) {
        const double total = row.sum();
        if (total > 0.0) row /= total;
    }
    return table;
}

}  // namespace

DecayEstimate decay_estimate(const FactorGraph& g, const FactorizationStructure& fs,
                             std::size_t block, const std::vector<int>& r_values,
                             const DecayOptions& opts) {
    if (block >= fs.blocks.size())
        throw std::invalid_argument("decay_estimate: block index out of range");
    fs.validate_shape(g.num_vertices());

    std::vector<int> u = fs.blocks[block].s;
    u.insert(u.end(), fs.blocks[block].pi.begin(), fs.blocks[block].pi.end());
    std::sort(u.begin(), u.end());

    const DenseDistribution mu = gibbs_measure(g, opts.enumeration_cap);
    const ProductSpace space = g.space();

    DecayEstimate out;
    for (int r : r_values) {
        const std::vector<int> ball = graph_ball(g, u, r);
        std::vector<char> inside(g.num_vertices(), 0);
        for (int v : ball) inside[v] = 1;
        std::vector<int> outside;
        for (int v = 0; v < g.num_vertices(); ++v)
            if (!inside[v]) outside.push_back(v);

        if (outside.empty()) {
            out.points.push_back({r, 0.0, true});
            continue;
        }

        const std::vector<Eigen::VectorXd> conds =
            clamp_conditionals(mu, space, u, outside);
        double worst = 0.0;
        bool exact = true;
        if (static_cast<int>(outside.size()) <= opts.exact_boundary_limit) {
            for (std::size_t a = 0; a < conds.size(); ++a) {
                if (conds[a].sum() == 0.0) continue;  // zero-probability clamp
                for (std::size_t b = a + 1; b < conds.size(); ++b) {
                    if (conds[b].sum() == 0.0) continue;
                    worst = std::max(worst, hellinger_distance(conds[a], conds[b]));
                }
            }
        } else {
            exact = false;
            Rng rng = make_stream(opts.sample_seed, static_cast<std::uint64_t>(r));
            for (std::size_t k = 0; k < opts.sampled_pairs; ++k) {
                const std::size_t a = uniform_index(rng, conds.size());
                const std::size_t b = uniform_index(rng, conds.size());
                if (a == b || conds[a].sum() == 0.0 || conds[b].sum() == 0.0) continue;
                worst = std::max(worst, hellinger_distance(conds[a], conds[b]));
            }
        }
        out.points.push_back({r, worst, exact});
    }

    // Fit log(distance) ~ -m r + log C1 over radii with nonzero distance.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (const auto& p : out.points) {
        if (p.distance <= 1e-12) continue;
        const double x = static_cast<double>(p.r);
        const double y = std::log(p.distance);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2 && sxx * used - sx * sx > 0.0) {
        const double slope = (sxy * used - sx * sy) / (sxx * used - sx * sx);
        const double intercept = (sy - slope * sx) / used;
        out.fitted_m = -slope;
        out.fitted_c1 = std::exp(intercept);
    } else if (used == 0) {
        out.fitted_m = std::numeric_limits<double>::infinity();
        out.fitted_c1 = 0.0;
    }
    return out;
}

}  // namespace pgibbs
