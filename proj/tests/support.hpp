#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Shared helpers for the test suites: chi-squared goodness of fit and small
// numeric utilities.

namespace testsupport {

// Regularized upper incomplete gamma Q(a, x) (series + continued fraction).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // Lower series, then complement.
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - gln);
        return 1.0 - p;
    }
    // Lentz continued fraction for Q directly.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

// Survival function of the chi-squared distribution.
inline double chi2_survival(double stat, double dof) {
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// Pearson chi-squared p-value of observed counts against expected
// probabilities. Cells with expected probability below `floor` are pooled.
inline double chi2_pvalue(const std::vector<std::size_t>& counts,
                          const std::vector<double>& probs, double floor = 1e-9) {
    if (counts.size() != probs.size()) throw std::invalid_argument("chi2: size mismatch");
    double total = 0.0;
    for (std::size_t c : counts) total += static_cast<double>(c);
    double stat = 0.0;
    double pooled_p = 0.0;
    double pooled_c = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] < floor) {
            pooled_p += probs[i];
            pooled_c += static_cast<double>(counts[i]);
            continue;
        }
        const double expect = probs[i] * total;
        const double diff = static_cast<double>(counts[i]) - expect;
        stat += diff * diff / expect;
        ++cells;
    }
    if (pooled_p > 0.0) {
        const double expect = pooled_p * total;
        const double diff = pooled_c - expect;
        stat += diff * diff / expect;
        ++cells;
    }
    if (cells < 2) return 1.0;
    return chi2_survival(stat, static_cast<double>(cells - 1));
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testsupport
