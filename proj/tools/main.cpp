// Command-line front end: experiment dispatch, seeding, CSV/JSON/SVG output.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pgibbs/coupling.hpp"
#include "pgibbs/io.hpp"
#include "pgibbs/synthetic.hpp"
#include "pgibbs/tree_ising.hpp"
#include "pgibbs/worked_examples.hpp"

namespace fs = std::filesystem;
using namespace pgibbs;

namespace {

struct GlobalFlags {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    int threads = 0;
    std::size_t budget = 0;  // 0 = library defaults
    bool svg = false;
};

std::size_t enumeration_budget(const GlobalFlags& g) {
    return g.budget ? g.budget : kDefaultEnumerationCap;
}
std::size_t augmented_budget(const GlobalFlags& g) {
    return g.budget ? g.budget : kDefaultAugmentedCap;
}

fs::path resolve_out(const GlobalFlags& g, const std::string& stem) {
    const std::string name = stem + (g.format == "json" ? ".json" : ".csv");
    if (g.out.empty()) return name;
    fs::path p(g.out);
    if (fs::is_directory(p) || g.out.back() == '/') return p / name;
    return p;
}

// One table abstraction feeding CSV, JSON and the optional SVG rendering.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    std::string csv() const {
        CsvTable t(columns);
        for (const auto& r : rows) t.add_row(r);
        return t.str();
    }
    std::string json() const {
        Json arr = Json::array();
        for (const auto& r : rows) {
            Json obj = Json::object();
            for (std::size_t c = 0; c < columns.size(); ++c) {
                // Numeric cells stay numeric in JSON.
                const std::string& cell = r[c];
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (!cell.empty() && end == cell.c_str() + cell.size() && std::isfinite(v))
                    obj[columns[c]] = v;
                else
                    obj[columns[c]] = cell;  // strings and inf sentinels stay textual
            }
            arr.push_back(std::move(obj));
        }
        return arr.dump(2) + "\n";
    }
};

void emit(const GlobalFlags& g, const std::string& stem, const Table& table,
          const std::string& x_column = "", const std::vector<std::string>& y_columns = {}) {
    const fs::path path = resolve_out(g, stem);
    write_text(path.string(), g.format == "json" ? table.json() : table.csv());

    if (!g.svg || y_columns.empty()) return;
    auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            if (table.columns[c] == name) return c;
        return std::nullopt;
    };
    std::vector<double> x;
    const auto xi = x_column.empty() ? std::nullopt : column_index(x_column);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        x.push_back(xi ? std::strtod(table.rows[r][*xi].c_str(), nullptr)
                       : static_cast<double>(r));
    std::vector<SvgSeries> series;
    for (const auto& name : y_columns) {
        const auto yi = column_index(name);
        if (!yi) continue;
        SvgSeries s{name, {}};
        for (const auto& row : table.rows)
            s.y.push_back(std::strtod(row[*yi].c_str(), nullptr));
        series.push_back(std::move(s));
    }
    fs::path svg_path = path;
    svg_path.replace_extension(".svg");
    write_text(svg_path.string(),
               svg_line_plot(stem, x_column.empty() ? "row" : x_column, x, series));
}

std::string opt_cell(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : "";
}

int run_two_state(const GlobalFlags& g, double p, const std::vector<double>& cs) {
    Table t;
    t.columns = {"p", "C", "kernel_dist", "stat_dist", "mix_q", "mix_k", "ratio"};
    for (double c : cs) {
        const auto rec = two_state_analysis(p, c);
        t.add({format_sig(rec.p), format_sig(rec.c), format_sig(rec.kernel_dist),
               format_sig(rec.stat_dist), std::to_string(rec.mix_q),
               std::to_string(rec.mix_k), format_sig(rec.ratio)});
    }
    emit(g, "two_state", t, "C", {"ratio"});
    return 0;
}

int run_birth_death(const GlobalFlags& g, int n, double p, const std::vector<double>& cns,
                    int mixing_limit, const std::string& kernel_out) {
    Table t;
    t.columns = {"n", "p", "Cn", "kernel_tv", "mu_low", "nu_low", "tv_stat", "mix_q"};
    for (double cn : cns) {
        const auto rec = birth_death_analysis(n, p, cn, mixing_limit);
        t.add({std::to_string(rec.n), format_sig(rec.p), format_sig(rec.c_n),
               format_sig(rec.kernel_tv), format_sig(rec.mu_low), format_sig(rec.nu_low),
               format_sig(rec.tv_stationary), opt_cell(rec.mix_q)});
    }
    emit(g, "birth_death", t, "Cn", {"tv_stat", "nu_low"});
    if (!kernel_out.empty())
        write_text(kernel_out, kernel_to_json(birth_death_kernel(n, p)).dump(2) + "\n");
    return 0;
}

int run_product_bernoulli(const GlobalFlags& g, int n, double p,
                          const std::vector<double>& ptildes) {
    Table t;
    t.columns = {"n", "p", "ptilde", "kernel_tv", "adell_bound", "exact_tv"};
    for (double pt : ptildes) {
        const auto rec = product_bernoulli_analysis(n, p, pt);
        t.add({std::to_string(rec.n), format_sig(rec.p), format_sig(rec.ptilde),
               format_sig(rec.kernel_tv), format_sig(rec.adell_bound),
               format_sig(rec.exact_tv)});
    }
    emit(g, "product_bernoulli", t, "ptilde", {"adell_bound", "exact_tv"});
    return 0;
}

int run_tree_decay(const GlobalFlags& g, int depth, double beta, double delta, int obs,
                   bool correlations, std::vector<int> radii) {
    const int n = tree_vertex_count(depth);
    const auto sample = generate(depth, beta, delta, std::vector<int>(n, obs), g.seed);
    const auto points = path_decay_check(depth, beta, sample.z, leftmost_path(depth));

    Table t;
    t.columns = {"j", "exact_tv", "bound", "beta"};
    for (const auto& pt : points)
        t.add({std::to_string(pt.position), format_sig(pt.exact_tv), format_sig(pt.bound),
               format_sig(beta)});
    emit(g, "decay", t, "j", {"exact_tv", "bound"});

    if (correlations) {
        if (radii.empty()) radii = {2, 3};
        const auto posterior = tree_posterior_graph(depth, beta, sample.z);
        const auto blocks = tree_blocks(depth);
        DecayOptions opts;
        opts.enumeration_cap = enumeration_budget(g);
        opts.sample_seed = g.seed;
        // Worst block per radius, then one shared fit.
        std::vector<double> worst(radii.size(), 0.0);
        for (std::size_t b = 0; b < blocks.blocks.size(); ++b) {
            const auto est = decay_estimate(posterior, blocks, b, radii, opts);
            for (std::size_t i = 0; i < radii.size(); ++i)
                worst[i] = std::max(worst[i], est.points[i].distance);
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            if (worst[i] <= 1e-12) continue;
            const double x = radii[i], y = std::log(worst[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
        double m = std::numeric_limits<double>::infinity(), c1 = 0.0;
        if (used >= 2 && sxx * used - sx * sx > 0.0) {
            const double slope = (sxy * used - sx * sy) / (sxx * used - sx * sx);
            m = -slope;
            c1 = std::exp((sy - slope * sx) / used);
        }
        Table ct;
        ct.columns = {"r", "distance", "fitted_m", "fitted_C1"};
        for (std::size_t i = 0; i < radii.size(); ++i)
            ct.add({std::to_string(radii[i]), format_sig(worst[i]), format_sig(m),
                    format_sig(c1)});
        GlobalFlags gc = g;
        if (!g.out.empty() && !fs::is_directory(g.out) && g.out.back() != '/')
            gc.out.clear();  // secondary file keeps its default name
        emit(gc, "correlations", ct, "r", {"distance"});
    }
    return 0;
}

std::vector<int> parse_rule(const std::string& rule, const std::vector<int>& depths, int obs) {
    if (rule == "full") return std::vector<int>(depths.size(), obs);
    if (rule == "scaled") {
        // Taper to full subsampling as the number of blocks grows, so the
        // measured perturbation stays inside a c / (sqrt(Gamma) log^2 Gamma)
        // envelope (later depths contribute zero).
        std::vector<int> m;
        for (int d : depths) m.push_back(tree_vertex_count(d) < 10 ? obs - 1 : obs);
        return m;
    }
    if (rule.rfind("fixed:", 0) == 0) {
        const int k = std::stoi(rule.substr(6));
        return std::vector<int>(depths.size(), k);
    }
    // Comma-separated per-depth list.
    std::vector<int> m;
    std::size_t pos = 0;
    while (pos <= rule.size()) {
        const std::size_t comma = rule.find(',', pos);
        const std::string tok =
            rule.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) m.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (m.size() != depths.size() && m.size() != 1)
        throw std::invalid_argument("subsample rule does not match the depth list");
    return m;
}

int run_tree_scaling(const GlobalFlags& g, const std::vector<int>& depths, double beta,
                     double delta, int obs, const std::string& rule, std::size_t replicas,
                     std::size_t steps) {
    ScalingOptions opts;
    opts.depths = depths;
    opts.beta = beta;
    opts.delta = delta;
    opts.obs_per_vertex = obs;
    opts.subsample_m = parse_rule(rule, depths, obs);
    opts.replicas = replicas;
    opts.steps = steps;
    opts.seed = g.seed;
    opts.threads = g.threads;
    opts.augmented_cap = augmented_budget(g);
    const auto study = scaling_study(opts);

    Table t;
    t.columns = {"depth", "gamma", "subsample_m", "perturbation_proxy", "hellinger_upper",
                 "stderr"};
    for (const auto& rec : study.records)
        t.add({std::to_string(rec.depth), std::to_string(rec.gamma),
               std::to_string(rec.subsample_m), format_sig(rec.perturbation_proxy),
               format_sig(rec.hellinger_upper), format_sig(rec.std_error)});
    emit(g, "scaling", t, "depth", {"hellinger_upper", "perturbation_proxy"});

    if (!study.skipped.empty()) {
        for (const auto& [depth, why] : study.skipped)
            std::cerr << "depth " << depth << " skipped: " << why << "\n";
        return 3;
    }
    return 0;
}

int run_subadditivity(const GlobalFlags& g, int pairs, int max_vertices, int max_labels) {
    Table t;
    t.columns = {"pair", "lhs", "rhs", "slack"};
    bool partial = false;
    for (int i = 0; i < pairs; ++i) {
        Rng rng = make_stream(g.seed, static_cast<std::uint64_t>(i));
        const auto tp = random_tree_measure_pair(rng, max_vertices, max_labels);
        try {
            const auto mu = gibbs_measure(tp.first, enumeration_budget(g));
            const auto nu = gibbs_measure(tp.second, enumeration_budget(g));
            const auto [lhs, rhs] =
                subadditivity_gap(mu, nu, tp.first.space(), tp.structure);
            t.add({std::to_string(i), format_sig(lhs), format_sig(rhs),
                   format_sig(rhs - lhs)});
        } catch (const BudgetError& e) {
            std::cerr << "pair " << i << " skipped: " << e.what() << "\n";
            partial = true;
        }
    }
    emit(g, "subadditivity", t, "pair", {"lhs", "rhs"});
    return partial ? 3 : 0;
}

int run_coupling(const GlobalFlags& g, const std::string& kernel_path, int x, int y,
                 std::size_t t_max, std::size_t replicas) {
    const auto kernel = kernel_from_json(load_json(kernel_path));
    if (x < 0 || x >= kernel.size() || y < 0 || y >= kernel.size())
        throw std::invalid_argument("coupling: start states outside the kernel");
    Rng rng = make_stream(g.seed, 0);
    const auto survival = coupling_tail(kernel, x, y, t_max, replicas, rng);
    Table t;
    t.columns = {"t", "survival"};
    for (std::size_t i = 0; i < survival.size(); ++i)
        t.add({std::to_string(i), format_sig(survival[i])});
    emit(g, "survival", t, "t", {"survival"});
    return 0;
}

int run_audit_kernel(const GlobalFlags& g, const std::string& kernel_path,
                     const std::string& against_path, const std::string& stationary_out,
                     double mixing_eps) {
    const auto kernel = kernel_from_json(load_json(kernel_path));
    const auto pi = stationary_distribution(kernel);
    const double residual =
        ((pi.mass().transpose() * kernel.matrix()).transpose() - pi.mass()).cwiseAbs().sum();
    const std::size_t mix = mixing_time(kernel, Metric::tv(), mixing_eps, pi, 1'000'000);

    double reversibility_gap = 0.0;
    for (Eigen::Index a = 0; a < kernel.size(); ++a)
        for (Eigen::Index b = 0; b < kernel.size(); ++b)
            reversibility_gap =
                std::max(reversibility_gap, std::abs(pi[a] * kernel.matrix()(a, b) -
                                                     pi[b] * kernel.matrix()(b, a)));

    std::string tv_against;
    if (!against_path.empty()) {
        const auto other = kernel_from_json(load_json(against_path));
        tv_against = format_sig(kernel_distance(kernel, other, Metric::tv()));
    }

    Table t;
    t.columns = {"size", "stationary_residual", "mixing_time_tv", "reversibility_gap",
                 "kernel_tv_against"};
    t.add({std::to_string(kernel.size()), format_sig(residual), std::to_string(mix),
           format_sig(reversibility_gap), tv_against});
    emit(g, "audit", t);

    if (!stationary_out.empty())
        write_text(stationary_out, distribution_to_json(pi).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perturbed Gibbs samplers on discrete factor graphs"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Master seed (expanded per replica)");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--format", g.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_option("--budget", g.budget, "State-space cap override");
    app.add_flag("--svg", g.svg, "Also write a line-plot SVG next to the output");

    // two-state
    double ts_p = 0.1;
    std::vector<double> ts_c{2.0};
    auto* two_state = app.add_subcommand("two-state", "Two-state sharpness example")->fallthrough();
    two_state->add_option("--p", ts_p, "Flip probability in (0, 0.5)");
    two_state->add_option("--C", ts_c, "Perturbation factor(s)")->delimiter(',');

    // birth-death
    int bd_n = 60;
    double bd_p = 0.25;
    std::vector<double> bd_cn{6.0};
    int bd_mixing_limit = 150;
    std::string bd_kernel_out;
    auto* birth_death =
        app.add_subcommand("birth-death", "Drift chain with a teleporting perturbation")->fallthrough();
    birth_death->add_option("--n", bd_n, "Number of states (<= 5000)");
    birth_death->add_option("--p", bd_p, "Upward step probability in (0, 0.5)");
    birth_death->add_option("--Cn", bd_cn, "Teleport scale(s); eps = Cn / n")->delimiter(',');
    birth_death->add_option("--mixing-limit", bd_mixing_limit,
                            "Compute mixing times only up to this n");
    birth_death->add_option("--kernel-out", bd_kernel_out,
                            "Also export the unperturbed kernel as JSON");

    // product-bernoulli
    int pb_n = 10;
    double pb_p = 0.4;
    std::vector<double> pb_pt{0.41};
    auto* product =
        app.add_subcommand("product-bernoulli", "Product-measure perturbation bounds")->fallthrough();
    product->add_option("--n", pb_n, "Coordinate scale (n^2 coordinates)");
    product->add_option("--p", pb_p, "Base success probability");
    product->add_option("--ptilde", pb_pt, "Perturbed probability(ies)")->delimiter(',');

    // tree-decay
    int td_depth = 4, td_obs = 3;
    double td_beta = 0.1, td_delta = 0.2;
    bool td_corr = false;
    std::vector<int> td_radii;
    auto* tree_decay =
        app.add_subcommand("tree-decay", "Root-clamp decay along a tree path")->fallthrough();
    tree_decay->add_option("--depth", td_depth, "Tree depth");
    tree_decay->add_option("--beta", td_beta, "Coupling strength");
    tree_decay->add_option("--delta", td_delta, "Observation flip noise in (0, 0.5)");
    tree_decay->add_option("--obs", td_obs, "Observations per vertex");
    tree_decay->add_flag("--correlations", td_corr,
                         "Also write the worst-block correlation decay table");
    tree_decay->add_option("--radii", td_radii, "Radii for the correlation table")->delimiter(',');

    // tree-scaling
    std::vector<int> sc_depths{2, 3, 4, 5, 6};
    double sc_beta = 0.1, sc_delta = 0.2;
    int sc_obs = 4;
    std::string sc_rule = "scaled";
    std::size_t sc_replicas = 32, sc_steps = 1'000'000;
    auto* tree_scaling =
        app.add_subcommand("tree-scaling", "Error scaling across tree depths")->fallthrough();
    tree_scaling->add_option("--depths", sc_depths, "Tree depths")->delimiter(',');
    tree_scaling->add_option("--beta", sc_beta, "Coupling strength");
    tree_scaling->add_option("--delta", sc_delta, "Observation flip noise");
    tree_scaling->add_option("--obs", sc_obs, "Observations per vertex");
    tree_scaling->add_option("--rule", sc_rule,
                             "Subsample sizes: scaled | full | fixed:k | comma list");
    tree_scaling->add_option("--replicas", sc_replicas, "Independent chains per depth");
    tree_scaling->add_option("--steps", sc_steps, "Steps per chain");

    // subadditivity
    int sa_pairs = 200, sa_vertices = 8, sa_labels = 3;
    auto* subadd =
        app.add_subcommand("subadditivity", "Blockwise Hellinger bound on random tree pairs")->fallthrough();
    subadd->add_option("--pairs", sa_pairs, "Number of random measure pairs");
    subadd->add_option("--max-vertices", sa_vertices, "Largest tree size");
    subadd->add_option("--max-labels", sa_labels, "Largest label count");

    // coupling
    std::string cp_kernel;
    int cp_x = 0, cp_y = 1;
    std::size_t cp_tmax = 64, cp_replicas = 100000;
    auto* coupling_cmd =
        app.add_subcommand("coupling", "Greedy coupling survival curve of a kernel")->fallthrough();
    coupling_cmd->add_option("--kernel", cp_kernel, "Kernel JSON file")->required();
    coupling_cmd->add_option("--x", cp_x, "First start state");
    coupling_cmd->add_option("--y", cp_y, "Second start state");
    coupling_cmd->add_option("--tmax", cp_tmax, "Largest time in the survival curve");
    coupling_cmd->add_option("--replicas", cp_replicas, "Monte-Carlo replicas");

    // audit-kernel
    std::string ak_kernel, ak_against, ak_stationary_out;
    double ak_eps = 0.25;
    auto* audit = app.add_subcommand("audit-kernel",
                                     "Stationary solve, mixing time and reversibility report")->fallthrough();
    audit->add_option("--kernel", ak_kernel, "Kernel JSON file")->required();
    audit->add_option("--against", ak_against, "Second kernel for a TV comparison");
    audit->add_option("--stationary-out", ak_stationary_out,
                      "Export the stationary distribution as JSON");
    audit->add_option("--mixing-eps", ak_eps, "Mixing threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (two_state->parsed()) return run_two_state(g, ts_p, ts_c);
        if (birth_death->parsed())
            return run_birth_death(g, bd_n, bd_p, bd_cn, bd_mixing_limit, bd_kernel_out);
        if (product->parsed()) return run_product_bernoulli(g, pb_n, pb_p, pb_pt);
        if (tree_decay->parsed())
            return run_tree_decay(g, td_depth, td_beta, td_delta, td_obs, td_corr, td_radii);
        if (tree_scaling->parsed())
            return run_tree_scaling(g, sc_depths, sc_beta, sc_delta, sc_obs, sc_rule,
                                    sc_replicas, sc_steps);
        if (subadd->parsed()) return run_subadditivity(g, sa_pairs, sa_vertices, sa_labels);
        if (coupling_cmd->parsed())
            return run_coupling(g, cp_kernel, cp_x, cp_y, cp_tmax, cp_replicas);
        if (audit->parsed())
            return run_audit_kernel(g, ak_kernel, ak_against, ak_stationary_out, ak_eps);
    } catch (const BudgetError& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
