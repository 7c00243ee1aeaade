#include <doctest.h>

#include <cmath>

#include "pgibbs/gibbs.hpp"
#include "pgibbs/synthetic.hpp"
#include "pgibbs/tree_ising.hpp"
#include "support.hpp"

using namespace pgibbs;

namespace {

FactorGraph two_spin_coupling(double beta) {
    Eigen::VectorXd table(4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) table[a * 2 + b] = beta * spin_of(a) * spin_of(b);
    return FactorGraph(2, 2, {Factor{{0, 1}, table}}, {{0, 1}});
}

}  // namespace

TEST_CASE("site conditional") {
    // No factors: uniform over labels.
    const FactorGraph empty(2, 3, {}, {});
    const auto p = site_conditional(empty, {0, 0}, 0);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));

    // Two-spin coupling with the partner clamped to +1.
    const auto g = two_spin_coupling(0.5);
    const auto q = site_conditional(g, {0, 0}, 0);
    CHECK(q[0] == doctest::Approx(0.731059).epsilon(1e-6));

    // Strong field: softmax tail.
    Eigen::VectorXd field(2);
    field << 10.0, -10.0;
    const FactorGraph strong(1, 2, {Factor{{0}, field}}, {});
    CHECK(site_conditional(strong, {1}, 0)[0] > 1.0 - 1e-8);
}

TEST_CASE("gibbs step is single site") {
    Rng rng = make_stream(3, 0);
    const auto sample = generate(2, 0.4, 0.2, std::vector<int>(7, 2), 1);
    const auto g = tree_posterior_graph(2, 0.4, sample.z);
    Configuration sigma(7, 0);
    for (int t = 0; t < 500; ++t) {
        const Configuration next = gibbs_step(g, sigma, rng);
        int changed = 0;
        for (int v = 0; v < 7; ++v) changed += next[v] != sigma[v];
        CHECK(changed <= 1);
        sigma = next;
    }
}

TEST_CASE("gibbs kernel on the two-spin model") {
    const auto g = two_spin_coupling(0.5);
    const auto q = gibbs_kernel(g);

    for (Eigen::Index x = 0; x < q.size(); ++x)
        CHECK(q.matrix().row(x).sum() == doctest::Approx(1.0).epsilon(1e-14));

    // From ++ (index 0), flipping the first spin lands at -+ (index 2):
    // half the site mass times the flip probability.
    CHECK(q.matrix()(0, 2) == doctest::Approx(0.5 * (1.0 - 0.731059)).epsilon(1e-5));

    const auto mu = gibbs_measure(g);
    const Eigen::VectorXd after = (mu.mass().transpose() * q.matrix()).transpose();
    CHECK((after - mu.mass()).cwiseAbs().sum() < 1e-12);
}

TEST_CASE("stationarity and reversibility on random graphs") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng = make_stream(17, seed);
        const auto g = random_factor_graph(rng, 256);
        const auto mu = gibbs_measure(g);
        const auto q = gibbs_kernel(g);

        const Eigen::VectorXd after = (mu.mass().transpose() * q.matrix()).transpose();
        CHECK((after - mu.mass()).cwiseAbs().sum() < 1e-12);

        double worst = 0.0;
        for (Eigen::Index a = 0; a < q.size(); ++a)
            for (Eigen::Index b = 0; b < q.size(); ++b)
                worst = std::max(worst, std::abs(mu[a] * q.matrix()(a, b) -
                                                 mu[b] * q.matrix()(b, a)));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("gibbs step matches its kernel row") {
    Rng rng = make_stream(21, 4);
    const auto g = random_factor_graph(rng, 64);
    const auto q = gibbs_kernel(g);
    const ProductSpace space = g.space();

    const std::size_t start = space.size() / 2;
    const Configuration sigma = space.decode(start);
    const std::size_t trials = 100000;
    std::vector<std::size_t> counts(space.size(), 0);
    Rng step_rng = make_stream(22, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        const Configuration next = gibbs_step(g, sigma, step_rng);
        ++counts[space.encode(next)];
    }
    std::vector<double> probs(space.size());
    for (std::size_t s = 0; s < space.size(); ++s)
        probs[s] = q.matrix()(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(s));
    CHECK(testsupport::chi2_pvalue(counts, probs) > 1e-3);
}

TEST_CASE("restricted kernel") {
    const auto sample = generate(1, 0.4, 0.25, std::vector<int>(3, 1), 9);
    const auto g = tree_posterior_graph(1, 0.4, sample.z);

    // B = V matches the full sampler.
    const auto full = gibbs_kernel(g);
    const auto all = restricted_kernel(g, {0, 1, 2});
    CHECK((full.matrix() - all.matrix()).cwiseAbs().maxCoeff() < 1e-15);

    // Empty B is the identity.
    const auto idle = restricted_kernel(g, {});
    CHECK((idle.matrix() - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);

    // Only the middle of a 3-chain updates: within a clamp class the
    // stationary law is the clamped conditional.
    Eigen::VectorXd table(4);
    table << 0.6, -0.6, -0.6, 0.6;
    const FactorGraph chain(3, 2,
                            {Factor{{0, 1}, table}, Factor{{1, 2}, table}},
                            {{0, 1}, {1, 2}});
    const auto restricted = restricted_kernel(chain, {1});
    const auto mu = gibbs_measure(chain);
    const ProductSpace space = chain.space();

    // Clamp class sigma(0)=1, sigma(2)=0: states 100 and 110.
    const std::size_t lo = space.encode({1, 0, 0});
    const std::size_t hi = space.encode({1, 1, 0});
    Eigen::MatrixXd sub(2, 2);
    sub << restricted.matrix()(lo, lo), restricted.matrix()(lo, hi),
        restricted.matrix()(hi, lo), restricted.matrix()(hi, hi);
    const auto sub_pi = stationary_distribution(StochasticKernel(sub));
    const auto cond = conditional_marginal(mu, space, {1}, {{0, 1}, {2, 0}});
    CHECK(std::abs(sub_pi[0] - cond[0]) < 1e-12);

    // States disagreeing with a clamp stay unreachable.
    CHECK(restricted.matrix()(lo, space.encode({0, 0, 0})) == 0.0);
}

TEST_CASE("hard constraints in the conditional") {
    Eigen::VectorXd hard(2);
    hard << 0.0, -std::numeric_limits<double>::infinity();
    const FactorGraph g(1, 2, {Factor{{0}, hard}}, {});
    const auto p = site_conditional(g, {1}, 0);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);

    // A slice where every label of vertex 0 is excluded.
    const double ninf = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd slice(4);
    slice << 0.0, ninf, ninf, ninf;
    const FactorGraph bad(2, 2, {Factor{{0, 1}, slice}}, {});
    CHECK_THROWS_AS(site_conditional(bad, {0, 1}, 0), std::domain_error);
}
