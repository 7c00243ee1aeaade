#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pgibbs/factor_graph.hpp"
#include "pgibbs/measures.hpp"
#include "pgibbs/pseudo_marginal.hpp"

namespace pgibbs {

using Json = nlohmann::ordered_json;

// Double formatted with 12 significant digits.
std::string format_sig(double v);

// RFC 4180 table: mandatory header row, CRLF line endings, minimal quoting.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    void write(const std::string& path) const;
    const std::vector<std::string>& header() const { return header_; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// JSON schemas used by the CLI:
//   distribution: {"states": [...], "mass": [...]}
//   kernel:       {"states": [...], "rows": [[...], ...]}
//   factor graph: {"q": int, "vertices": [...], "edges": [[u,v], ...],
//                  "factors": [{"scope": [...], "table": [...]}]}
//                 (tables row-major over scope labels; labels 0-based)
//   observations: {"delta": real, "counts": {...}, "obs": {vertex: [labels]}}
Json distribution_to_json(const DenseDistribution& dist,
                          const std::vector<std::string>& states = {});
DenseDistribution distribution_from_json(const Json& j);

Json kernel_to_json(const StochasticKernel& kernel,
                    const std::vector<std::string>& states = {});
StochasticKernel kernel_from_json(const Json& j);

Json factor_graph_to_json(const FactorGraph& g);
FactorGraph factor_graph_from_json(const Json& j);

Json observations_to_json(const ObservationSet& z, double delta,
                          const std::vector<std::string>& vertices = {});
ObservationSet observations_from_json(const Json& j);

Json load_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Self-contained SVG line plot of one or more named series over a shared
// abscissa (presentation only).
struct SvgSeries {
    std::string name;
    std::vector<double> y;
};
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::vector<double>& x, const std::vector<SvgSeries>& series);

}  // namespace pgibbs
