#include "pgibbs/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pgibbs {

DenseDistribution::DenseDistribution(Eigen::VectorXd mass) : mass_(std::move(mass)) {
    if (mass_.size() < 1) throw std::invalid_argument("DenseDistribution: empty support");
    if ((mass_.array() < 0.0).any())
        throw std::invalid_argument("DenseDistribution: negative mass");
    if (std::abs(mass_.sum() - 1.0) > kMassTolerance)
        throw std::invalid_argument("DenseDistribution: mass does not sum to 1");
}

DenseDistribution DenseDistribution::uniform(Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("DenseDistribution::uniform: empty support");
    return DenseDistribution(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

DenseDistribution DenseDistribution::from_unnormalized(Eigen::VectorXd weights) {
    if (weights.size() < 1) throw std::invalid_argument("from_unnormalized: empty support");
    if ((weights.array() < 0.0).any())
        throw std::invalid_argument("from_unnormalized: negative weight");
    const double total = weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("from_unnormalized: zero total mass");
    weights /= total;
    return DenseDistribution(std::move(weights));
}

DenseDistribution DenseDistribution::from_log_weights(const Eigen::VectorXd& log_weights) {
    if (log_weights.size() < 1) throw std::invalid_argument("from_log_weights: empty support");
    const double top = log_weights.maxCoeff();
    if (!std::isfinite(top))
        throw std::invalid_argument("from_log_weights: no finite log weight");
    // scalar exp so that -inf maps to an exact zero
    Eigen::VectorXd w(log_weights.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
    return from_unnormalized(std::move(w));
}

StochasticKernel::StochasticKernel(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 1 || rows_.rows() != rows_.cols())
        throw std::invalid_argument("StochasticKernel: matrix must be square and non-empty");
    for (Eigen::Index x = 0; x < rows_.rows(); ++x) {
        if ((rows_.row(x).array() < 0.0).any())
            throw std::invalid_argument("StochasticKernel: negative transition probability");
        if (std::abs(rows_.row(x).sum() - 1.0) > kMassTolerance)
            throw std::invalid_argument("StochasticKernel: row does not sum to 1");
    }
}

StochasticKernel StochasticKernel::identity(Eigen::Index n) {
    return StochasticKernel(Eigen::MatrixXd::Identity(n, n));
}

double kernel_distance(const StochasticKernel& Q, const StochasticKernel& K,
                       const Metric& metric) {
    detail::check_same_support(Q.size(), K.size(), "kernel_distance");
    double sup = 0.0;
    for (Eigen::Index x = 0; x < Q.size(); ++x)
        sup = std::max(sup, metric(Q.row(x), K.row(x)));
    return sup;
}

namespace {

double l1_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K) {
    return ((pi.transpose() * K).transpose() - pi).cwiseAbs().sum();
}

// Strong connectivity of the support graph (finite chains: irreducibility).
bool irreducible(const Eigen::MatrixXd& K) {
    const Eigen::Index n = K.rows();
    auto reach = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<Eigen::Index> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const Eigen::Index v = stack.back();
            stack.pop_back();
            for (Eigen::Index w = 0; w < n; ++w) {
                const double edge = forward ? K(v, w) : K(w, v);
                if (edge > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        for (char c : seen)
            if (!c) return false;
        return true;
    };
    return reach(true) && reach(false);
}

}  // namespace

DenseDistribution stationary_distribution(const StochasticKernel& K,
                                          const StationaryOptions& opts) {
    const Eigen::Index n = K.size();
    if (!irreducible(K.matrix()))
        throw ConvergenceError("stationary_distribution: kernel is reducible");
    Eigen::VectorXd pi;

    if (n <= opts.direct_solve_limit) {
        // Solve (K^T - I) pi = 0 with the last equation replaced by sum = 1.
        Eigen::MatrixXd a = K.matrix().transpose() - Eigen::MatrixXd::Identity(n, n);
        a.row(n - 1).setOnes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        b[n - 1] = 1.0;
        pi = a.partialPivLu().solve(b);
        if (!pi.allFinite())
            throw ConvergenceError("stationary_distribution: singular system (reducible kernel?)");
    } else {
        pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        Eigen::VectorXd next(n);
        std::size_t it = 0;
        for (;; ++it) {
            if (it >= opts.power_iteration_cap)
                throw ConvergenceError("stationary_distribution: power iteration cap reached");
            next.noalias() = (pi.transpose() * K.matrix()).transpose();
            next /= next.sum();
            const double delta = (next - pi).cwiseAbs().sum();
            pi.swap(next);
            if (delta <= opts.power_tolerance) break;
        }
    }

    // Clip solver noise, renormalize, and insist on a true fixed point.
    pi = pi.cwiseMax(0.0);
    const double total = pi.sum();
    if (!(total > 0.0))
        throw ConvergenceError("stationary_distribution: degenerate solution");
    pi /= total;
    if (l1_residual(pi, K.matrix()) > opts.residual_tolerance)
        throw ConvergenceError(
            "stationary_distribution: no unique fixed point within tolerance");
    return DenseDistribution(std::move(pi));
}

namespace {

double sup_distance_to(const Eigen::MatrixXd& power, const Eigen::VectorXd& pi,
                       const Metric& metric) {
    double sup = 0.0;
    for (Eigen::Index x = 0; x < power.rows(); ++x)
        sup = std::max(sup, metric(power.row(x).transpose(), pi));
    return sup;
}

}  // namespace

std::size_t mixing_time(const StochasticKernel& K, const Metric& metric, double eps,
                        const DenseDistribution& pi, std::size_t step_cap) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("mixing_time: eps must lie in (0,1)");
    Eigen::MatrixXd power = K.matrix();
    for (std::size_t t = 1; t <= step_cap; ++t) {
        if (sup_distance_to(power, pi.mass(), metric) < eps) return t;
        power = power * K.matrix();
    }
    throw BudgetError("mixing_time: step cap exceeded", step_cap, step_cap + 1);
}

std::size_t mixing_time(const StochasticKernel& K, const Metric& metric, double eps,
                        std::size_t step_cap) {
    return mixing_time(K, metric, eps, stationary_distribution(K), step_cap);
}

DenseDistribution conditional_marginal(const DenseDistribution& mu, const ProductSpace& space,
                                       const std::vector<int>& targets,
                                       const PartialConfiguration& clamp) {
    if (static_cast<std::size_t>(mu.size()) != space.size())
        throw std::invalid_argument("conditional_marginal: measure does not match space");
    if (targets.empty()) throw std::invalid_argument("conditional_marginal: empty target set");
    for (int v : targets)
        if (v < 0 || v >= space.num_vertices())
            throw std::invalid_argument("conditional_marginal: target outside vertex set");
    for (const auto& [v, l] : clamp) {
        if (v < 0 || v >= space.num_vertices() || l < 0 || l >= space.labels())
            throw std::invalid_argument("conditional_marginal: clamp outside space");
        for (int t : targets)
            if (t == v)
                throw std::invalid_argument("conditional_marginal: clamp overlaps targets");
    }

    const std::size_t out_size =
        checked_pow(space.labels(), targets.size(), SIZE_MAX, "conditional_marginal");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_size));

    Configuration sigma;
    for (std::size_t s = 0; s < space.size(); ++s) {
        space.decode_into(s, sigma);
        bool agrees = true;
        for (const auto& [v, l] : clamp) {
            if (sigma[v] != l) {
                agrees = false;
                break;
            }
        }
        if (!agrees) continue;
        acc[static_cast<Eigen::Index>(space.encode_subset(sigma, targets))] += mu[s];
    }

    const double total = acc.sum();
    if (!(total > 0.0))
        throw ConditioningError("conditional_marginal: clamped event has zero probability");
    acc /= total;
    return DenseDistribution(std::move(acc));
}

void FactorizationStructure::validate_shape(int num_vertices) const {
    std::vector<char> seen(num_vertices, 0);
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& b = blocks[j];
        if (b.s.empty()) throw StructureError("FactorizationStructure: empty block");
        if (j == 0 && !b.pi.empty())
            throw StructureError("FactorizationStructure: first parent set must be empty");
        for (int v : b.pi) {
            if (v < 0 || v >= num_vertices || !seen[v])
                throw StructureError(
                    "FactorizationStructure: parent set not contained in earlier blocks");
        }
        for (int v : b.s) {
            if (v < 0 || v >= num_vertices || seen[v])
                throw StructureError("FactorizationStructure: blocks must partition vertices");
            seen[v] = 1;
        }
    }
    for (char c : seen)
        if (!c) throw StructureError("FactorizationStructure: blocks must cover all vertices");
}

namespace {

// Joint marginal table over `verts` (row-major), by one pass over the space.
Eigen::VectorXd marginal_table(const DenseDistribution& mu, const ProductSpace& space,
                               const std::vector<int>& verts) {
    const std::size_t size = checked_pow(space.labels(), verts.size(), SIZE_MAX, "marginal");
    Eigen::VectorXd table = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    Configuration sigma;
    for (std::size_t s = 0; s < space.size(); ++s) {
        space.decode_into(s, sigma);
        table[static_cast<Eigen::Index>(space.encode_subset(sigma, verts))] += mu[s];
    }
    return table;
}

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

std::optional<FactorizationWitness> check_factorization(const DenseDistribution& mu,
                                                        const ProductSpace& space,
                                                        const FactorizationStructure& fs,
                                                        double tol) {
    if (static_cast<std::size_t>(mu.size()) != space.size())
        throw std::invalid_argument("check_factorization: measure does not match space");
    fs.validate_shape(space.num_vertices());

    const std::size_t num_blocks = fs.blocks.size();
    // Per-block tables: joint over Pi_j u S_j and over Pi_j alone, plus the
    // same over predecessors u S_j for witness attribution.
    std::vector<Eigen::VectorXd> joint(num_blocks), parent(num_blocks);
    std::vector<std::vector<int>> pi_s(num_blocks);
    for (std::size_t j = 0; j < num_blocks; ++j) {
        pi_s[j] = concat(fs.blocks[j].pi, fs.blocks[j].s);
        joint[j] = marginal_table(mu, space, pi_s[j]);
        if (!fs.blocks[j].pi.empty()) parent[j] = marginal_table(mu, space, fs.blocks[j].pi);
    }

    Configuration sigma;
    for (std::size_t s = 0; s < space.size(); ++s) {
        space.decode_into(s, sigma);
        double prod = 1.0;
        for (std::size_t j = 0; j < num_blocks; ++j) {
            const double top = joint[j][static_cast<Eigen::Index>(
                space.encode_subset(sigma, pi_s[j]))];
            double cond;
            if (fs.blocks[j].pi.empty()) {
                cond = top;
            } else {
                const double bottom = parent[j][static_cast<Eigen::Index>(
                    space.encode_subset(sigma, fs.blocks[j].pi))];
                cond = bottom > 0.0 ? top / bottom : 0.0;
            }
            prod *= cond;
        }
        const double target = mu[s];
        const double err = std::abs(target - prod);
        if (err > tol * std::max({target, prod, 1e-300})) {
            // Attribute the failure: first block whose Pi-conditional differs
            // from the full-predecessor conditional at sigma.
            std::vector<int> pred;
            std::size_t bad = num_blocks - 1;
            double bad_err = 0.0;
            for (std::size_t j = 0; j < num_blocks; ++j) {
                const auto& blk = fs.blocks[j];
                const std::vector<int> pred_s = concat(pred, blk.s);
                const Eigen::VectorXd full_joint = marginal_table(mu, space, pred_s);
                const double top =
                    full_joint[static_cast<Eigen::Index>(space.encode_subset(sigma, pred_s))];
                double full_cond = top;
                if (!pred.empty()) {
                    const Eigen::VectorXd full_parent = marginal_table(mu, space, pred);
                    const double bottom = full_parent[static_cast<Eigen::Index>(
                        space.encode_subset(sigma, pred))];
                    full_cond = bottom > 0.0 ? top / bottom : 0.0;
                }
                const double pi_top =
                    joint[j][static_cast<Eigen::Index>(space.encode_subset(sigma, pi_s[j]))];
                double pi_cond = pi_top;
                if (!blk.pi.empty()) {
                    const double bottom = parent[j][static_cast<Eigen::Index>(
                        space.encode_subset(sigma, blk.pi))];
                    pi_cond = bottom > 0.0 ? pi_top / bottom : 0.0;
                }
                const double block_err =
                    std::abs(full_cond - pi_cond) / std::max({full_cond, pi_cond, 1e-300});
                if (block_err > tol) {
                    bad = j;
                    bad_err = block_err;
                    break;
                }
                pred = pred_s;
            }
            return FactorizationWitness{sigma, bad,
                                        bad_err > 0.0 ? bad_err
                                                      : err / std::max(target, 1e-300)};
        }
    }
    return std::nullopt;
}

SubadditivityResult subadditivity_gap(const DenseDistribution& mu, const DenseDistribution& nu,
                                      const ProductSpace& space,
                                      const FactorizationStructure& fs) {
    if (mu.size() != nu.size())
        throw std::invalid_argument("subadditivity_gap: mismatched supports");
    if (auto w = check_factorization(mu, space, fs))
        throw StructureError("subadditivity_gap: first measure does not factorize over fs");
    if (auto w = check_factorization(nu, space, fs))
        throw StructureError("subadditivity_gap: second measure does not factorize over fs");

    const double lhs = std::pow(hellinger_distance(mu, nu), 2);
    double rhs = 0.0;
    for (const auto& blk : fs.blocks) {
        std::vector<int> verts = blk.s;
        verts.insert(verts.end(), blk.pi.begin(), blk.pi.end());
        const DenseDistribution pm = conditional_marginal(mu, space, verts);
        const DenseDistribution qm = conditional_marginal(nu, space, verts);
        rhs += std::pow(hellinger_distance(pm, qm), 2);
    }
    return {lhs, rhs};
}

double l2_perturbation_bound(double kernel_dist, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::domain_error("l2_perturbation_bound: rho must lie in (0,1)");
    if (!(kernel_dist >= 0.0) || kernel_dist >= 1.0 - rho)
        throw std::domain_error("l2_perturbation_bound: requires 0 <= d < 1-rho");
    const double gap = 1.0 - rho;
    return kernel_dist / std::sqrt(gap * gap - kernel_dist * kernel_dist);
}

double worst_pair_tv_bound(double r) {
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("worst_pair_tv_bound: r must lie in (0,1]");
    // (1-r)/(1+r), evaluated through the extremal pair's atom delta so the
    // result matches the constructed pair bit for bit.
    const double delta = r / (1.0 + r);
    return (1.0 - delta) - delta;
}

}  // namespace pgibbs
