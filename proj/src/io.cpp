#include "pgibbs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pgibbs {

std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvTable: header row is mandatory");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(std::move(cells));
}

namespace {

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(cells[i]);
    }
    out += "\r\n";
}

}  // namespace

std::string CsvTable::str() const {
    std::string out;
    append_row(out, header_);
    for (const auto& row : rows_) append_row(out, row);
    return out;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
}

Json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    Json j;
    f >> j;
    return j;
}

namespace {

std::vector<std::string> default_states(Eigen::Index n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

}  // namespace

Json distribution_to_json(const DenseDistribution& dist, const std::vector<std::string>& states) {
    Json j;
    j["states"] = states.empty() ? default_states(dist.size()) : states;
    j["mass"] = std::vector<double>(dist.mass().begin(), dist.mass().end());
    return j;
}

DenseDistribution distribution_from_json(const Json& j) {
    const auto mass = j.at("mass").get<std::vector<double>>();
    if (j.contains("states") && j.at("states").size() != mass.size())
        throw std::invalid_argument("distribution json: states/mass size mismatch");
    Eigen::VectorXd v(static_cast<Eigen::Index>(mass.size()));
    for (std::size_t i = 0; i < mass.size(); ++i) v[static_cast<Eigen::Index>(i)] = mass[i];
    return DenseDistribution(std::move(v));
}

Json kernel_to_json(const StochasticKernel& kernel, const std::vector<std::string>& states) {
    Json j;
    j["states"] = states.empty() ? default_states(kernel.size()) : states;
    std::vector<std::vector<double>> rows;
    rows.reserve(kernel.size());
    for (Eigen::Index x = 0; x < kernel.size(); ++x) {
        const auto row = kernel.matrix().row(x);
        rows.emplace_back(row.begin(), row.end());
    }
    j["rows"] = rows;
    return j;
}

StochasticKernel kernel_from_json(const Json& j) {
    const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (j.contains("states") && static_cast<Eigen::Index>(j.at("states").size()) != n)
        throw std::invalid_argument("kernel json: states/rows size mismatch");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        if (static_cast<Eigen::Index>(rows[x].size()) != n)
            throw std::invalid_argument("kernel json: rows must be square");
        for (Eigen::Index y = 0; y < n; ++y) m(x, y) = rows[x][y];
    }
    return StochasticKernel(std::move(m));
}

Json factor_graph_to_json(const FactorGraph& g) {
    Json j;
    j["q"] = g.labels();
    j["vertices"] = g.vertex_names();
    std::vector<std::vector<int>> edges;
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    j["edges"] = edges;
    Json factors = Json::array();
    for (const auto& f : g.factors()) {
        Json jf;
        jf["scope"] = f.scope;
        jf["table"] = std::vector<double>(f.table.begin(), f.table.end());
        factors.push_back(std::move(jf));
    }
    j["factors"] = std::move(factors);
    return j;
}

FactorGraph factor_graph_from_json(const Json& j) {
    const int q = j.at("q").get<int>();
    std::vector<std::string> names;
    for (const auto& v : j.at("vertices")) {
        if (v.is_string())
            names.push_back(v.get<std::string>());
        else
            names.push_back(std::to_string(v.get<int>()));
    }
    const int n = static_cast<int>(names.size());

    auto vertex_id = [&](const Json& v) -> int {
        if (v.is_number_integer()) return v.get<int>();
        const std::string s = v.get<std::string>();
        for (int i = 0; i < n; ++i)
            if (names[i] == s) return i;
        throw std::invalid_argument("factor graph json: unknown vertex " + s);
    };

    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
        if (e.size() != 2) throw std::invalid_argument("factor graph json: bad edge");
        edges.emplace_back(vertex_id(e[0]), vertex_id(e[1]));
    }
    std::vector<Factor> factors;
    for (const auto& jf : j.at("factors")) {
        Factor f;
        for (const auto& v : jf.at("scope")) f.scope.push_back(vertex_id(v));
        const auto table = jf.at("table").get<std::vector<double>>();
        f.table.resize(static_cast<Eigen::Index>(table.size()));
        for (std::size_t i = 0; i < table.size(); ++i)
            f.table[static_cast<Eigen::Index>(i)] = table[i];
        factors.push_back(std::move(f));
    }
    return FactorGraph(n, q, std::move(factors), std::move(edges), std::move(names));
}

Json observations_to_json(const ObservationSet& z, double delta,
                          const std::vector<std::string>& vertices) {
    Json j;
    j["delta"] = delta;
    Json counts = Json::object();
    Json obs = Json::object();
    for (int v = 0; v < z.num_vertices(); ++v) {
        const std::string key =
            vertices.empty() ? std::to_string(v) : vertices[static_cast<std::size_t>(v)];
        counts[key] = z.count(v);
        obs[key] = z.obs[v];
    }
    j["counts"] = std::move(counts);
    j["obs"] = std::move(obs);
    return j;
}

ObservationSet observations_from_json(const Json& j) {
    const double delta = j.at("delta").get<double>();
    const auto& counts = j.at("counts");
    const int n = static_cast<int>(counts.size());
    std::vector<std::vector<int>> obs(n);
    int q = 2;
    for (int v = 0; v < n; ++v) {
        const std::string key = std::to_string(v);
        if (!counts.contains(key))
            throw std::invalid_argument("observations json: counts must be keyed 0..n-1");
        const int c = counts.at(key).get<int>();
        if (j.at("obs").contains(key)) obs[v] = j.at("obs").at(key).get<std::vector<int>>();
        if (static_cast<int>(obs[v].size()) != c)
            throw std::invalid_argument("observations json: counts do not match obs");
        for (int z_val : obs[v]) q = std::max(q, z_val + 1);
    }
    return ObservationSet::flip_noise(std::move(obs), q, delta);
}

namespace {

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::vector<double>& x, const std::vector<SvgSeries>& series) {
    const double width = 640, height = 420;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (double v : x) {
        if (!any || v < xmin) xmin = v;
        if (!any || v > xmax) xmax = v;
        any = true;
    }
    bool any_y = false;
    for (const auto& s : series)
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (!any_y || v < ymin) ymin = v;
            if (!any_y || v > ymax) ymax = v;
            any_y = true;
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double v) { return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    // Axis extrema labels.
    out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_sig(xmin) << "</text>\n";
    out << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_sig(xmax) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymin)
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_sig(ymin) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax) + 4
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_sig(ymax) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill=\"none\" stroke=\"" << colors[si % 5]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            out << fmt_coord(px(x[i])) << "," << fmt_coord(py(s.y[i])) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 4 << "\" y=\"" << mt + 16 * (si + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colors[si % 5] << "\">"
            << s.name << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace pgibbs
