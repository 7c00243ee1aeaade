#include <doctest.h>

#include <cmath>

#include "pgibbs/measures.hpp"
#include "pgibbs/synthetic.hpp"
#include "pgibbs/worked_examples.hpp"
#include "support.hpp"

using namespace pgibbs;

namespace {

DenseDistribution dist(std::initializer_list<double> mass) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(mass.size()));
    Eigen::Index i = 0;
    for (double m : mass) v[i++] = m;
    return DenseDistribution(std::move(v));
}

StochasticKernel kernel2(double q12, double q21) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0 - q12, q12, q21, 1.0 - q21;
    return StochasticKernel(std::move(m));
}

}  // namespace

TEST_CASE("tv distance basics") {
    const auto p = dist({0.25, 0.75});
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, dist({0.75, 0.25})) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tv_distance(dist({1, 0, 0}), dist({0, 0.5, 0.5})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(tv_distance(p, dist({1.0 / 3, 1.0 / 3, 1.0 / 3})), std::invalid_argument);
}

TEST_CASE("hellinger distance basics") {
    const auto p = dist({1.0, 0.0});
    CHECK(hellinger_distance(p, p) == 0.0);
    CHECK(hellinger_distance(p, dist({0.0, 1.0})) == doctest::Approx(std::sqrt(2.0)));
    // Direct evaluation of the defining sum: (1-sqrt(1/2))^2 + 1/2 = 2 - sqrt 2.
    CHECK(hellinger_distance(p, dist({0.5, 0.5})) ==
          doctest::Approx(std::sqrt(2.0 - std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("l2 distance with reference") {
    const auto lambda = dist({0.5, 0.5});
    CHECK(l2_distance(lambda, lambda, lambda) == 0.0);
    // Densities wrt lambda: (1,1) vs (1/2,3/2); both atoms contribute 1/8.
    CHECK(l2_distance(dist({0.5, 0.5}), dist({0.25, 0.75}), lambda) ==
          doctest::Approx(0.5).epsilon(1e-14));
    // Densities (2,0) vs (0,2): sqrt((4+4)/2) = 2.
    CHECK(l2_distance(dist({1.0, 0.0}), dist({0.0, 1.0}), lambda) ==
          doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(l2_distance(dist({1.0, 0.0}), dist({0.0, 1.0}), dist({0.0, 1.0})),
                    std::domain_error);
}

TEST_CASE("kernel distance") {
    const auto q = kernel2(0.1, 0.1);
    CHECK(kernel_distance(q, q, Metric::tv()) == 0.0);

    // Teleport mixture: sup-row TV is eps * (1 - min_i Q(i, n)).
    const int n = 10;
    const auto bd = birth_death_kernel(n, 0.25);
    const auto tele = teleport_kernel(bd, 0.1, n - 1);
    double min_to_target = 1.0;
    for (int i = 0; i < n; ++i) min_to_target = std::min(min_to_target, bd.matrix()(i, n - 1));
    CHECK(kernel_distance(bd, tele, Metric::tv()) ==
          doctest::Approx(0.1 * (1.0 - min_to_target)).epsilon(1e-13));
    CHECK(kernel_distance(bd, tele, Metric::tv()) == doctest::Approx(0.1).epsilon(1e-13));

    // Two-state pair under L2(mu), mu uniform: single differing row.
    const auto k = kernel2(0.2, 0.1);
    CHECK(kernel_distance(q, k, Metric::l2(dist({0.5, 0.5}))) ==
          doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("stationary distribution") {
    const auto flip = kernel2(0.3, 0.3);
    const auto pi = stationary_distribution(flip);
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-13));

    const auto skew = stationary_distribution(kernel2(0.2, 0.1));
    CHECK(skew[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(skew[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));

    // Birth-death chain: detailed-balance product formula as oracle.
    const int n = 25;
    const double p = 0.25;
    const auto bd = birth_death_kernel(n, p);
    const auto mu = stationary_distribution(bd);
    Eigen::VectorXd oracle(n);
    const double ratio = p / (1.0 - p);
    for (int i = 0; i < n; ++i) oracle[i] = std::pow(ratio, i);
    oracle /= oracle.sum();
    CHECK(testsupport::max_abs_diff(mu.mass(), oracle) < 1e-13);

    // Fixed-point residual contract.
    CHECK(((mu.mass().transpose() * bd.matrix()).transpose() - mu.mass()).cwiseAbs().sum() <
          1e-12);

    // Reducible kernel: two disconnected flips.
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(4, 4);
    block(0, 1) = block(1, 0) = 1.0;
    block(2, 3) = block(3, 2) = 1.0;
    CHECK_THROWS_AS(stationary_distribution(StochasticKernel(block)), ConvergenceError);
}

TEST_CASE("stationary distribution via power iteration") {
    Rng rng = make_stream(11, 0);
    const auto k = random_kernel(rng, 40);
    const auto direct = stationary_distribution(k);
    StationaryOptions opts;
    opts.direct_solve_limit = 8;  // force the iterative path
    const auto iterated = stationary_distribution(k, opts);
    CHECK(testsupport::max_abs_diff(direct.mass(), iterated.mass()) < 1e-11);
}

TEST_CASE("mixing time") {
    // Rows already stationary: one step suffices.
    Eigen::MatrixXd flat(3, 3);
    flat << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
    CHECK(mixing_time(StochasticKernel(flat), Metric::tv(), 0.25) == 1);

    // Two-state flip p = 0.1: sup TV after t steps is 0.8^t / 2.
    CHECK(mixing_time(kernel2(0.1, 0.1), Metric::tv(), 0.25) == 4);

    CHECK_THROWS_AS(mixing_time(kernel2(0.01, 0.01), Metric::tv(), 1e-6, 3), BudgetError);
}

TEST_CASE("conditional marginal") {
    const ProductSpace space(2, 2);
    // Product measure: marginal of one coordinate.
    Eigen::VectorXd prod(4);
    // p(a)=0.3/0.7 times p(b)=0.6/0.4, row-major (a most significant).
    prod << 0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4;
    const DenseDistribution mu{prod};
    const auto marg_a = conditional_marginal(mu, space, {0});
    CHECK(marg_a[0] == doctest::Approx(0.3).epsilon(1e-14));

    // Two-spin coupling, clamp the second coordinate.
    const double beta = 0.5;
    Eigen::VectorXd ising(4);
    ising << std::exp(beta), std::exp(-beta), std::exp(-beta), std::exp(beta);
    const auto nu = DenseDistribution::from_unnormalized(ising);
    const auto cond = conditional_marginal(nu, space, {0}, {{1, 0}});
    CHECK(cond[0] ==
          doctest::Approx(std::exp(beta) / (std::exp(beta) + std::exp(-beta))).epsilon(1e-12));
    CHECK(cond[0] == doctest::Approx(0.731059).epsilon(1e-6));

    // Zero-probability clamp.
    Eigen::VectorXd degenerate(4);
    degenerate << 0.5, 0.0, 0.5, 0.0;
    CHECK_THROWS_AS(conditional_marginal(DenseDistribution{degenerate}, space, {0}, {{1, 1}}),
                    ConditioningError);
}

TEST_CASE("conditional marginal matches brute force on a three-vertex chain") {
    Rng rng = make_stream(7, 0);
    const ProductSpace space(3, 2);
    const auto mu = random_distribution(rng, 8);
    const auto marg = conditional_marginal(mu, space, {1, 2}, {{0, 1}});
    // Brute force: sum over agreeing configurations.
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(4);
    for (std::size_t s = 0; s < 8; ++s) {
        const Configuration c = space.decode(s);
        if (c[0] != 1) continue;
        acc[c[1] * 2 + c[2]] += mu[static_cast<Eigen::Index>(s)];
    }
    acc /= acc.sum();
    CHECK(testsupport::max_abs_diff(marg.mass(), acc) < 1e-14);
}

TEST_CASE("subadditivity gap") {
    const ProductSpace space(2, 2);
    FactorizationStructure fs;
    fs.blocks.push_back({{0}, {}});
    fs.blocks.push_back({{1}, {}});

    // Independent Bernoulli coordinates p = 0.4 vs 0.41.
    auto product = [](double p) {
        Eigen::VectorXd v(4);
        v << (1 - p) * (1 - p), (1 - p) * p, p * (1 - p), p * p;
        return DenseDistribution(std::move(v));
    };
    const auto mu = product(0.4);
    const auto nu = product(0.41);
    const auto [lhs, rhs] = subadditivity_gap(mu, nu, space, fs);
    CHECK(lhs <= rhs + 1e-10);

    // rhs oracle: each singleton block contributes d_H^2 of the pair
    // (Bernoulli 0.4, Bernoulli 0.41).
    const double bern = std::pow(std::sqrt(0.4) - std::sqrt(0.41), 2) +
                        std::pow(std::sqrt(0.6) - std::sqrt(0.59), 2);
    CHECK(rhs == doctest::Approx(2.0 * bern).epsilon(1e-9));

    const auto [l0, r0] = subadditivity_gap(mu, mu, space, fs);
    CHECK(l0 == 0.0);
    CHECK(r0 == 0.0);

    // A measure that does not factorize over independent singleton blocks.
    Eigen::VectorXd xor_mass(4);
    xor_mass << 0.45, 0.05, 0.05, 0.45;
    FactorizationStructure indep;
    indep.blocks.push_back({{0}, {}});
    indep.blocks.push_back({{1}, {}});
    CHECK_THROWS_AS(subadditivity_gap(DenseDistribution{xor_mass}, mu, space, indep),
                    StructureError);
}

TEST_CASE("l2 perturbation bound") {
    CHECK(l2_perturbation_bound(0.0, 0.5) == 0.0);
    CHECK(l2_perturbation_bound(0.1, 0.5) ==
          doctest::Approx(0.1 / std::sqrt(0.24)).epsilon(1e-14));
    CHECK(l2_perturbation_bound(0.1, 0.5) == doctest::Approx(0.204124).epsilon(1e-5));
    CHECK_THROWS_AS(l2_perturbation_bound(0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(l2_perturbation_bound(0.1, 1.5), std::domain_error);
}

TEST_CASE("worst pair tv bound") {
    CHECK(worst_pair_tv_bound(1.0) == 0.0);
    CHECK(worst_pair_tv_bound(1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(worst_pair_tv_bound(0.0), std::domain_error);
    CHECK_THROWS_AS(worst_pair_tv_bound(1.5), std::domain_error);

    // Equals the exact TV of the constructed extremal pair.
    for (int i = 1; i <= 50; ++i) {
        const double r = i / 50.0;
        const double delta = r / (1.0 + r);
        const double exact =
            tv_distance(dist({delta, 1.0 - delta}), dist({1.0 - delta, delta}));
        CHECK(worst_pair_tv_bound(r) == doctest::Approx(exact).epsilon(1e-14));
    }
    const double r = std::exp(-6.0 * 0.2);
    CHECK(worst_pair_tv_bound(r) == doctest::Approx(0.53705).epsilon(1e-5));
}

TEST_CASE("metric chain on random pairs") {
    Rng rng = make_stream(1234, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 63));
        const auto p = random_distribution(rng, n);
        const auto q = random_distribution(rng, n);
        const double tv = tv_distance(p, q);
        const double h = hellinger_distance(p, q);
        const double l2 = l2_distance(p, q, DenseDistribution::uniform(n));
        CHECK(0.5 * h * h <= tv + 1e-10);
        CHECK(tv <= h + 1e-10);
        CHECK(h <= l2 + 1e-10);
    }
}

TEST_CASE("tv is a metric") {
    Rng rng = make_stream(99, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 15));
        const auto p = random_distribution(rng, n);
        const auto q = random_distribution(rng, n);
        const auto r = random_distribution(rng, n);
        CHECK(tv_distance(p, q) == tv_distance(q, p));
        CHECK(tv_distance(p, p) <= 1e-12);
        CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12);
    }
}
