#include <doctest.h>

#include "pgibbs/io.hpp"
#include "pgibbs/synthetic.hpp"
#include "pgibbs/tree_ising.hpp"
#include "support.hpp"

using namespace pgibbs;

TEST_CASE("csv formatting") {
    CsvTable t({"a", "b"});
    t.add_row({"1", "two, with comma"});
    t.add_row({format_sig(1.0 / 3.0), "quote\"inside"});
    const std::string text = t.str();
    CHECK(text ==
          "a,b\r\n1,\"two, with comma\"\r\n0.333333333333,\"quote\"\"inside\"\r\n");
    CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
    CHECK(format_sig(0.15) == "0.15");
    CHECK(format_sig(2.0) == "2");
}

TEST_CASE("distribution json round trip") {
    Rng rng = make_stream(51, 0);
    const auto p = random_distribution(rng, 6);
    const auto j = distribution_to_json(p);
    const auto back = distribution_from_json(j);
    CHECK(testsupport::max_abs_diff(p.mass(), back.mass()) == 0.0);
    CHECK(j.at("states").size() == 6);
}

TEST_CASE("kernel json round trip") {
    Rng rng = make_stream(52, 0);
    const auto k = random_kernel(rng, 5);
    const auto back = kernel_from_json(kernel_to_json(k));
    CHECK((k.matrix() - back.matrix()).cwiseAbs().maxCoeff() == 0.0);

    Json bad = kernel_to_json(k);
    bad["rows"][0][0] = 0.75;  // row no longer sums to one
    CHECK_THROWS_AS(kernel_from_json(bad), std::invalid_argument);
}

TEST_CASE("factor graph json round trip") {
    Rng rng = make_stream(53, 0);
    const auto g = random_factor_graph(rng, 128);
    const auto back = factor_graph_from_json(factor_graph_to_json(g));
    CHECK(back.num_vertices() == g.num_vertices());
    CHECK(back.labels() == g.labels());
    REQUIRE(back.factors().size() == g.factors().size());
    CHECK(testsupport::max_abs_diff(gibbs_measure(g).mass(), gibbs_measure(back).mass()) <
          1e-15);
}

TEST_CASE("observations json round trip") {
    const auto sample = generate(2, 0.4, 0.2, std::vector<int>(7, 3), 54);
    const auto j = observations_to_json(sample.z, 0.2);
    const auto back = observations_from_json(j);
    CHECK(back.num_vertices() == 7);
    for (int v = 0; v < 7; ++v) CHECK(back.obs[v] == sample.z.obs[v]);
    CHECK(testsupport::max_abs_diff(back.loglik.reshaped(), sample.z.loglik.reshaped()) <
          1e-15);
}

TEST_CASE("svg plot is self contained") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<SvgSeries> series{{"one", {0.1, 0.2, 0.15, 0.3}},
                                        {"two", {0.3, 0.1, 0.05, 0.02}}};
    const std::string svg = svg_line_plot("title", "x", x, series);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);
}
