#include "pgibbs/worked_examples.hpp"

#include <cmath>
#include <limits>

namespace pgibbs {

TwoStateRecord two_state_analysis(double p, double c, double eps, std::size_t step_cap) {
    if (!(p > 0.0 && p < 0.5))
        throw std::invalid_argument("two_state_analysis: p must lie in (0, 0.5)");
    if (!(c > 0.0 && c < 1.0 / p))
        throw std::invalid_argument("two_state_analysis: C must lie in (0, 1/p)");

    Eigen::MatrixXd qm(2, 2), km(2, 2);
    qm << 1.0 - p, p, p, 1.0 - p;
    km << 1.0 - c * p, c * p, p, 1.0 - p;
    const StochasticKernel q(qm), k(km);

    const DenseDistribution mu = stationary_distribution(q);
    const DenseDistribution nu = stationary_distribution(k);
    const Metric metric = Metric::l2(mu);

    TwoStateRecord rec;
    rec.p = p;
    rec.c = c;
    rec.kernel_dist = kernel_distance(q, k, metric);
    rec.stat_dist = l2_distance(mu, nu, mu);
    rec.mix_q = mixing_time(q, metric, eps, mu, step_cap);
    rec.mix_k = mixing_time(k, metric, eps, nu, step_cap);
    rec.rate_q = 1.0 - std::abs(1.0 - qm(0, 1) - qm(1, 0));
    rec.rate_k = 1.0 - std::abs(1.0 - km(0, 1) - km(1, 0));
    const double denom = static_cast<double>(std::min(rec.mix_q, rec.mix_k)) * rec.kernel_dist;
    rec.ratio = denom > 0.0 ? rec.stat_dist / denom : 0.0;
    return rec;
}

StochasticKernel birth_death_kernel(int n, double p) {
    if (n < 2) throw std::invalid_argument("birth_death_kernel: need at least two states");
    if (!(p > 0.0 && p < 0.5))
        throw std::invalid_argument("birth_death_kernel: p must lie in (0, 0.5)");
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) rows(i, i + 1) = 0.5 * p;
        if (i > 0) rows(i, i - 1) = 0.5 * (1.0 - p);
        rows(i, i) = 1.0 - (i + 1 < n ? 0.5 * p : 0.0) - (i > 0 ? 0.5 * (1.0 - p) : 0.0);
    }
    return StochasticKernel(std::move(rows));
}

StochasticKernel teleport_kernel(const StochasticKernel& q, double eps, Eigen::Index target) {
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("teleport_kernel: eps must lie in [0,1)");
    if (target < 0 || target >= q.size())
        throw std::invalid_argument("teleport_kernel: target outside state space");
    Eigen::MatrixXd rows = (1.0 - eps) * q.matrix();
    rows.col(target).array() += eps;
    return StochasticKernel(std::move(rows));
}

BirthDeathRecord birth_death_analysis(int n, double p, double c_n, int mixing_limit,
                                      std::size_t step_cap) {
    if (n > 5000) throw BudgetError("birth_death_analysis: state cap is 5000", 5000, n);
    const double eps = c_n / static_cast<double>(n);
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("birth_death_analysis: need C_n/n in [0,1)");

    const StochasticKernel q = birth_death_kernel(n, p);
    const StochasticKernel k = teleport_kernel(q, eps, n - 1);
    const DenseDistribution mu = stationary_distribution(q);
    const DenseDistribution nu = stationary_distribution(k);

    BirthDeathRecord rec;
    rec.n = n;
    rec.p = p;
    rec.c_n = c_n;
    rec.kernel_tv = kernel_distance(q, k, Metric::tv());
    // States are 1..n at indices 0..n-1.
    for (int i = 0; i < n; ++i) {
        const int state = i + 1;
        if (state <= n / 3.0) rec.mu_low += mu[i];
        if (state < 2.0 * n / 3.0) rec.nu_low += nu[i];
    }
    rec.tv_stationary = tv_distance(mu, nu);
    if (n <= mixing_limit) {
        rec.mix_q = mixing_time(q, Metric::tv(), 0.25, mu, step_cap);
        rec.mix_k = mixing_time(k, Metric::tv(), 0.25, nu, step_cap);
    }
    return rec;
}

namespace {

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double binomial_tv(int m, double p, double ptilde) {
    double sum = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double lb = log_binom(m, k);
        const double a = std::exp(lb + k * std::log(p) + (m - k) * std::log1p(-p));
        const double b = std::exp(lb + k * std::log(ptilde) + (m - k) * std::log1p(-ptilde));
        sum += std::abs(a - b);
    }
    return 0.5 * sum;
}

ProductBernoulliRecord product_bernoulli_analysis(int n, double p, double ptilde) {
    if (!(0.01 < p && p < ptilde && ptilde < 0.99) && !(p == ptilde))
        throw std::invalid_argument("product_bernoulli_analysis: need 0.01 < p <= ptilde < 0.99");
    const int m = n * n;

    ProductBernoulliRecord rec;
    rec.n = n;
    rec.p = p;
    rec.ptilde = ptilde;

    // Row TV of the two samplers from a state with k ones:
    // (1/2)(1 + |2k-m|/m) |ptilde - p|; the sup is at k = 0 or k = m.
    const double diff = std::abs(ptilde - p);
    double row_sup = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double row =
            0.5 * (1.0 + std::abs(2.0 * k - m) / static_cast<double>(m)) * diff;
        row_sup = std::max(row_sup, row);
    }
    rec.kernel_tv = row_sup;

    const double cx = (ptilde - p) * std::sqrt((m + 2.0) / (2.0 * p * (1.0 - p)));
    if (cx >= 1.0) {
        rec.adell_bound = std::numeric_limits<double>::infinity();
    } else {
        rec.adell_bound = 0.5 * std::sqrt(std::exp(1.0)) * cx / ((1.0 - cx) * (1.0 - cx));
    }

    rec.exact_tv = p == ptilde ? 0.0 : binomial_tv(m, p, ptilde);
    return rec;
}

}  // namespace pgibbs
