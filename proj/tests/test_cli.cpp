#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pgibbs/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;

int run(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find("\r\n"));
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("no-such-command") == 2);
    CHECK(run("two-state --p 0.7 --out " + (g_dir / "x.csv").string()) == 2);
    CHECK(run("coupling --x 0 --y 1") == 2);  // missing required kernel
}

TEST_CASE("declared csv headers") {
    const fs::path d = g_dir / "headers";
    fs::create_directories(d);
    const std::string out = " --out " + d.string() + "/";

    REQUIRE(run("two-state --p 0.1 --C 1.5" + out) == 0);
    CHECK(first_line(slurp(d / "two_state.csv")) ==
          "p,C,kernel_dist,stat_dist,mix_q,mix_k,ratio");

    REQUIRE(run("birth-death --n 30 --p 0.25 --Cn 3 --kernel-out " +
                (d / "kernel.json").string() + out) == 0);
    CHECK(first_line(slurp(d / "birth_death.csv")) ==
          "n,p,Cn,kernel_tv,mu_low,nu_low,tv_stat,mix_q");

    REQUIRE(run("product-bernoulli --n 5 --p 0.4 --ptilde 0.41" + out) == 0);
    CHECK(first_line(slurp(d / "product_bernoulli.csv")) ==
          "n,p,ptilde,kernel_tv,adell_bound,exact_tv");

    REQUIRE(run("tree-decay --depth 2 --beta 0.1 --delta 0.2 --seed 4 --correlations" + out) ==
            0);
    CHECK(first_line(slurp(d / "decay.csv")) == "j,exact_tv,bound,beta");
    CHECK(first_line(slurp(d / "correlations.csv")) == "r,distance,fitted_m,fitted_C1");

    REQUIRE(run("tree-scaling --depths 2 --replicas 2 --steps 4000 --rule full --seed 1" +
                out) == 0);
    CHECK(first_line(slurp(d / "scaling.csv")) ==
          "depth,gamma,subsample_m,perturbation_proxy,hellinger_upper,stderr");

    REQUIRE(run("subadditivity --pairs 3 --seed 2" + out) == 0);
    CHECK(first_line(slurp(d / "subadditivity.csv")) == "pair,lhs,rhs,slack");

    REQUIRE(run("coupling --kernel " + (d / "kernel.json").string() +
                " --x 0 --y 29 --tmax 8 --replicas 500 --seed 3" + out) == 0);
    CHECK(first_line(slurp(d / "survival.csv")) == "t,survival");

    REQUIRE(run("audit-kernel --kernel " + (d / "kernel.json").string() +
                " --stationary-out " + (d / "pi.json").string() + out) == 0);
    CHECK(first_line(slurp(d / "audit.csv")) ==
          "size,stationary_residual,mixing_time_tv,reversibility_gap,kernel_tv_against");

    // Exported stationary distribution parses back.
    const auto pi = pgibbs::distribution_from_json(pgibbs::load_json((d / "pi.json").string()));
    CHECK(pi.size() == 30);
}

TEST_CASE("seeded runs are byte identical") {
    const fs::path a = g_dir / "det_a", b = g_dir / "det_b";
    fs::create_directories(a);
    fs::create_directories(b);
    REQUIRE(run("subadditivity --pairs 5 --seed 9 --out " + a.string() + "/") == 0);
    REQUIRE(run("subadditivity --pairs 5 --seed 9 --out " + b.string() + "/") == 0);
    CHECK(slurp(a / "subadditivity.csv") == slurp(b / "subadditivity.csv"));

    REQUIRE(run("tree-decay --depth 3 --seed 11 --out " + a.string() + "/") == 0);
    REQUIRE(run("tree-decay --depth 3 --seed 11 --out " + b.string() + "/") == 0);
    CHECK(slurp(a / "decay.csv") == slurp(b / "decay.csv"));

    // A different seed changes stochastic outputs.
    REQUIRE(run("tree-decay --depth 3 --seed 12 --out " + b.string() + "/") == 0);
    CHECK(slurp(a / "decay.csv") != slurp(b / "decay.csv"));
}

TEST_CASE("json format and svg output") {
    const fs::path d = g_dir / "fmt";
    fs::create_directories(d);
    REQUIRE(run("two-state --p 0.1 --C 1.1,1.2 --format json --svg --out " + d.string() +
                "/") == 0);
    const auto j = pgibbs::load_json((d / "two_state.json").string());
    REQUIRE(j.is_array());
    CHECK(j.size() == 2);
    CHECK(j[0].contains("ratio"));
    CHECK(j[0].at("p").get<double>() == 0.1);
    const std::string svg = slurp(d / "two_state.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("budget exhaustion exits 3 with partial results") {
    const fs::path d = g_dir / "budget";
    fs::create_directories(d);
    CHECK(run("subadditivity --pairs 4 --seed 2 --budget 2 --out " + d.string() + "/") == 3);
    CHECK(first_line(slurp(d / "subadditivity.csv")) == "pair,lhs,rhs,slack");
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-cli> [doctest args]\n", argv[0]);
        return 1;
    }
    g_cli = argv[1];
    g_dir = fs::temp_directory_path() / "pgibbs_cli_tests";
    fs::remove_all(g_dir);
    fs::create_directories(g_dir);

    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv + 1);
    const int rc = ctx.run();
    fs::remove_all(g_dir);
    return rc;
}
