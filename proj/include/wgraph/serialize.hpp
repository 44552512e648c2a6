#ifndef WGRAPH_SERIALIZE_HPP
#define WGRAPH_SERIALIZE_HPP

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "wgraph/graph.hpp"
#include "wgraph/motifs.hpp"
#include "wgraph/vbem.hpp"

namespace wgraph {

using Json = nlohmann::ordered_json;

/// {n, edges: [[i, j], ...], names: [...]}
Json to_json(const Graph& graph);
Graph graph_from_json(const Json& j);

/// {per_q: [{Q, a, eta, zeta, elbo, iterations, converged[, tau]}], weights, map_q, warnings}
Json to_json(const VariationalPosterior& posterior, bool include_tau);
Json to_json(const FitEnsemble& ensemble, bool include_tau = false);

/// {m, convention, values: [[row], ...]} for a Grid graphon.
Json grid_to_json(const GraphonSpec& grid);

/// {motif, rows, method, mu[, se]}
Json to_json(const MotifSpec& motif, const MotifProbability& p);

/// Fixed-format number used by every CSV writer so reruns are byte-identical.
std::string format_number(double x);

/// m lines of m comma-separated values after a '#' header giving m and the
/// midpoint convention. Row i holds u = (i + 0.5) / m.
void write_grid_csv(const GraphonSpec& grid, const std::filesystem::path& path);

/// "u,v,w" long format, one line per cell; suitable for contour plotting.
void write_grid_long_csv(const GraphonSpec& grid, const std::filesystem::path& path);

/// Two-column "w,density" CSV.
void write_pdf_csv(std::span<const double> w, std::span<const double> density, const std::filesystem::path& path);

void write_json(const Json& j, const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

} // namespace wgraph

#endif
