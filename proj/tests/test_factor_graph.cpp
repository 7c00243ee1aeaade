#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pgibbs/factor_graph.hpp"
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

TEST_CASE("gibbs measure") {
    // No factors: uniform.
    const FactorGraph empty(3, 2, {}, {});
    const auto uniform = gibbs_measure(empty);
    for (Eigen::Index i = 0; i < uniform.size(); ++i)
        CHECK(uniform[i] == doctest::Approx(1.0 / 8).epsilon(1e-14));

    // Two-spin coupling at beta = 0.5.
    const auto mu = gibbs_measure(two_spin_coupling(0.5));
    const double z = 2.0 * std::exp(0.5) + 2.0 * std::exp(-0.5);
    CHECK(mu[0] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-13));
    CHECK(mu[0] == doctest::Approx(0.365529).epsilon(1e-6));
    CHECK(mu[3] == doctest::Approx(mu[0]).epsilon(1e-13));

    // Single-vertex field h = 1.
    Eigen::VectorXd field(2);
    field << 1.0, -1.0;
    const FactorGraph single(1, 2, {Factor{{0}, field}}, {});
    const auto nu = gibbs_measure(single);
    CHECK(nu[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)))
                       .epsilon(1e-13));
    CHECK(nu[0] == doctest::Approx(0.880797).epsilon(1e-6));

    CHECK_THROWS_AS(gibbs_measure(FactorGraph(30, 2, {}, {})), BudgetError);
}

TEST_CASE("gibbs measure ignores constant shifts") {
    const double beta = 0.7;
    const auto base = gibbs_measure(two_spin_coupling(beta));
    Eigen::VectorXd shifted(4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            shifted[a * 2 + b] = beta * spin_of(a) * spin_of(b) + 37.5;
    const auto mu = gibbs_measure(FactorGraph(2, 2, {Factor{{0, 1}, shifted}}, {{0, 1}}));
    CHECK(testsupport::max_abs_diff(base.mass(), mu.mass()) < 1e-12);
}

TEST_CASE("dependency sets") {
    Eigen::VectorXd pair_table(4);
    pair_table << 0.3, -0.1, 0.2, 0.9;
    Eigen::VectorXd constant = Eigen::VectorXd::Constant(4, 2.5);
    const FactorGraph g(3, 2, {Factor{{0, 1}, pair_table}, Factor{{1, 2}, constant}}, {});

    const auto deps = dependency_sets(g);
    CHECK(deps.scope_per_factor[0] == std::vector<int>{0, 1});
    CHECK(deps.scope_per_factor[1].empty());  // constant factor tightens to nothing
    CHECK(deps.factors_per_vertex[0] == std::vector<int>{0});
    CHECK(deps.factors_per_vertex[1] == std::vector<int>{0});
    CHECK(deps.factors_per_vertex[2].empty());

    // Consistency: x in S[phi] iff phi in A[x].
    for (int v = 0; v < g.num_vertices(); ++v)
        for (int fi : deps.factors_per_vertex[v]) {
            const auto& scope = deps.scope_per_factor[fi];
            CHECK(std::find(scope.begin(), scope.end(), v) != scope.end());
        }
}

TEST_CASE("dependency sets on a depth-1 observed tree") {
    std::vector<std::vector<int>> obs{{0, 0}, {1}, {0}};
    const auto z = ObservationSet::flip_noise(std::move(obs), 2, 0.2);
    const auto g = tree_posterior_graph(1, 0.4, z);
    // Root: two edge factors plus its observation factor.
    CHECK(g.factors_at(0).size() == 3);
    CHECK(g.factors_at(1).size() == 2);
}

TEST_CASE("validate factorization") {
    // Independent product model with singleton blocks.
    Eigen::VectorXd f0(2), f1(2);
    f0 << 0.4, -0.4;
    f1 << -0.2, 0.2;
    const FactorGraph indep(2, 2, {Factor{{0}, f0}, Factor{{1}, f1}}, {});
    FactorizationStructure singletons;
    singletons.blocks.push_back({{0}, {}});
    singletons.blocks.push_back({{1}, {}});
    CHECK(!validate_factorization(indep, singletons));

    // Depth-2 posterior with parent blocks passes; dropping the parent sets
    // fails with a witness.
    const auto sample = generate(2, 0.5, 0.2, std::vector<int>(7, 2), 5);
    const auto posterior = tree_posterior_graph(2, 0.5, sample.z);
    CHECK(!validate_factorization(posterior, tree_blocks(2)));

    FactorizationStructure broken = tree_blocks(2);
    broken.blocks[1].pi.clear();  // vertex 1 no longer conditioned on the root
    const auto witness = validate_factorization(posterior, broken);
    REQUIRE(witness.has_value());
    CHECK(witness->block == 1);
    CHECK(witness->relative_error > 1e-9);
}

TEST_CASE("graph ball") {
    const auto g = tree_prior_graph(2, 0.3);  // 7 vertices
    const std::vector<int> root{0};
    CHECK(graph_ball(g, root, 1) == root);
    CHECK(graph_ball(g, root, 2) == std::vector<int>{0, 1, 2});
    CHECK(graph_ball(g, root, 10).size() == 7);

    // Monotone in r and in A.
    std::vector<int> prev;
    for (int r = 1; r <= 4; ++r) {
        const auto ball = graph_ball(g, root, r);
        CHECK(std::includes(ball.begin(), ball.end(), prev.begin(), prev.end()));
        prev = ball;
    }
    const auto bigger = graph_ball(g, {0, 5}, 2);
    const auto smaller = graph_ball(g, root, 2);
    CHECK(std::includes(bigger.begin(), bigger.end(), smaller.begin(), smaller.end()));
}

TEST_CASE("ball adjacency includes factor scopes") {
    // No declared edges, one pairwise factor: the scope still connects.
    Eigen::VectorXd table(4);
    table << 0.5, -0.5, -0.5, 0.5;
    const FactorGraph g(3, 2, {Factor{{0, 2}, table}}, {});
    const auto ball = graph_ball(g, {0}, 2);
    CHECK(ball == std::vector<int>{0, 2});
}

TEST_CASE("factor construction errors") {
    Eigen::VectorXd bad_size(3);
    bad_size << 1, 2, 3;
    CHECK_THROWS_AS(FactorGraph(2, 2, {Factor{{0, 1}, bad_size}}, {}), std::invalid_argument);

    Eigen::VectorXd with_nan(2);
    with_nan << 0.0, std::nan("");
    CHECK_THROWS_AS(FactorGraph(1, 2, {Factor{{0}, with_nan}}, {}), std::invalid_argument);

    // -inf is allowed (hard constraint).
    Eigen::VectorXd hard(2);
    hard << 0.0, -std::numeric_limits<double>::infinity();
    const FactorGraph g(1, 2, {Factor{{0}, hard}}, {});
    const auto mu = gibbs_measure(g);
    CHECK(mu[0] == 1.0);
    CHECK(mu[1] == 0.0);

    CHECK_THROWS_AS(FactorGraph(2, 2, {}, {{0, 0}}), std::invalid_argument);
}
