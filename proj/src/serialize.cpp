#include "wgraph/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace wgraph {

namespace {

Json matrix_json(const Matrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

const Grid& as_grid(const GraphonSpec& spec)
{
    const auto* g = std::get_if<Grid>(&spec.variant());
    if (!g) throw std::invalid_argument("expected a grid graphon");
    return *g;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

Json to_json(const Graph& graph)
{
    Json edges = Json::array();
    for (const auto& [i, j] : graph.edges()) edges.push_back({i, j});
    return Json{{"n", graph.num_nodes()}, {"edges", std::move(edges)}, {"names", graph.names()}};
}

Graph graph_from_json(const Json& j)
{
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    std::vector<std::string> names;
    if (j.contains("names")) names = j.at("names").get<std::vector<std::string>>();
    return Graph(j.at("n").get<std::size_t>(), std::move(edges), std::move(names));
}

Json to_json(const VariationalPosterior& post, bool include_tau)
{
    Json j{{"Q", post.Q},
           {"a", std::vector<double>(post.a.data(), post.a.data() + post.a.size())},
           {"eta", matrix_json(post.eta)},
           {"zeta", matrix_json(post.zeta)},
           {"elbo", post.elbo},
           {"iterations", post.iterations},
           {"converged", post.converged}};
    if (include_tau) j["tau"] = matrix_json(post.tau);
    return j;
}

Json to_json(const FitEnsemble& ens, bool include_tau)
{
    Json per_q = Json::array();
    for (int Q = 1; Q <= ens.q_max(); ++Q) {
        if (ens.fits[Q - 1])
            per_q.push_back(to_json(*ens.fits[Q - 1], include_tau));
        else
            per_q.push_back(Json{{"Q", Q}, {"failed", true}});
    }
    return Json{{"per_q", std::move(per_q)}, {"weights", ens.weights}, {"map_q", ens.map_q}, {"warnings", ens.warnings}};
}

Json grid_to_json(const GraphonSpec& spec)
{
    const auto& g = as_grid(spec);
    Json rows = Json::array();
    for (std::size_t i = 0; i < g.m; ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < g.m; ++j) row.push_back(g.at(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"m", g.m}, {"convention", "midpoint: row i is u=(i+0.5)/m, column j is v=(j+0.5)/m"}, {"values", std::move(rows)}};
}

Json to_json(const MotifSpec& motif, const MotifProbability& p)
{
    Json j{{"motif", motif.name()}, {"rows", motif.row_string()}, {"method", to_string(p.method)}, {"mu", p.value}};
    if (p.se > 0.0) j["se"] = p.se;
    return j;
}

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_grid_csv(const GraphonSpec& spec, const std::filesystem::path& path)
{
    const auto& g = as_grid(spec);
    auto out = open_out(path);
    out << "# m=" << g.m << " midpoint grid: row i is u=(i+0.5)/m, column j is v=(j+0.5)/m\n";
    for (std::size_t i = 0; i < g.m; ++i) {
        for (std::size_t j = 0; j < g.m; ++j) out << (j ? "," : "") << format_number(g.at(i, j));
        out << '\n';
    }
}

void write_grid_long_csv(const GraphonSpec& spec, const std::filesystem::path& path)
{
    const auto& g = as_grid(spec);
    auto out = open_out(path);
    out << "u,v,w\n";
    const double m = static_cast<double>(g.m);
    for (std::size_t i = 0; i < g.m; ++i)
        for (std::size_t j = 0; j < g.m; ++j)
            out << format_number((i + 0.5) / m) << ',' << format_number((j + 0.5) / m) << ',' << format_number(g.at(i, j)) << '\n';
}

void write_pdf_csv(std::span<const double> w, std::span<const double> density, const std::filesystem::path& path)
{
    if (w.size() != density.size()) throw std::invalid_argument("write_pdf_csv: size mismatch");
    auto out = open_out(path);
    out << "w,density\n";
    for (std::size_t k = 0; k < w.size(); ++k) out << format_number(w[k]) << ',' << format_number(density[k]) << '\n';
}

void write_json(const Json& j, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return Json::parse(in);
}

} // namespace wgraph
