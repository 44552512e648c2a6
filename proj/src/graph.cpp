#include "wgraph/graph.hpp"
#include "wgraph/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace wgraph {

Graph::Graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> names)
    : n_(n), edges_(std::move(edges)), adjacency_(n), names_(std::move(names))
{
    if (!names_.empty() && names_.size() != n_)
        throw std::invalid_argument("Graph: names size does not match node count");
    for (auto& [i, j] : edges_) {
        if (i >= n_ || j >= n_) throw std::invalid_argument("Graph: edge endpoint out of range");
        if (i == j) throw std::invalid_argument("Graph: self-loop");
        if (i > j) std::swap(i, j);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& [i, j] : edges_) {
        adjacency_[i].push_back(j);
        adjacency_[j].push_back(i);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

double Graph::density() const noexcept
{
    const auto pairs = num_pairs();
    return pairs == 0 ? 0.0 : static_cast<double>(edges_.size()) / static_cast<double>(pairs);
}

bool Graph::has_edge(NodeId i, NodeId j) const
{
    const auto& adj = adjacency_.at(i);
    return std::binary_search(adj.begin(), adj.end(), j);
}

Graph Graph::permuted(const std::vector<NodeId>& perm) const
{
    if (perm.size() != n_) throw std::invalid_argument("Graph::permuted: permutation size mismatch");
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& [i, j] : edges_) edges.emplace_back(perm[i], perm[j]);
    std::vector<std::string> names;
    if (!names_.empty()) {
        names.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) names[perm[i]] = names_[i];
    }
    return Graph(n_, std::move(edges), std::move(names));
}

// ---------------------------------------------------------------------------
// Graphons

namespace {

void check_unit(double u, const char* what)
{
    if (!(u >= 0.0 && u <= 1.0)) throw std::out_of_range(std::string("graphon coordinate ") + what + " outside [0,1]");
}

struct Validator
{
    void operator()(const ProductForm& p) const
    {
        if (!(p.rho > 0.0 && p.rho <= 1.0)) throw std::invalid_argument("ProductForm: rho must lie in (0,1]");
        if (!(p.lambda >= 1.0)) throw std::invalid_argument("ProductForm: lambda must be >= 1");
        // max W = rho * lambda^2
        if (p.rho * p.lambda * p.lambda > 1.0 + 1e-12)
            throw std::invalid_argument("ProductForm: lambda exceeds 1/sqrt(rho)");
    }

    void operator()(const Blockwise& b) const
    {
        const auto q = b.alpha.size();
        if (q == 0) throw std::invalid_argument("Blockwise: empty proportion vector");
        double total = 0.0;
        for (double a : b.alpha) {
            if (!(a > 0.0)) throw std::invalid_argument("Blockwise: proportions must be positive");
            total += a;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("Blockwise: proportions must sum to 1");
        if (b.pi.size() != q) throw std::invalid_argument("Blockwise: pi must be Q x Q");
        for (std::size_t r = 0; r < q; ++r) {
            if (b.pi[r].size() != q) throw std::invalid_argument("Blockwise: pi must be Q x Q");
            for (std::size_t c = 0; c < q; ++c) {
                const double p = b.pi[r][c];
                if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Blockwise: pi entries must lie in [0,1]");
                if (b.pi[c].size() == q && p != b.pi[c][r]) throw std::invalid_argument("Blockwise: pi must be symmetric");
            }
        }
    }

    void operator()(const Grid& g) const
    {
        if (g.m == 0 || g.values.size() != g.m * g.m) throw std::invalid_argument("Grid: values must be m x m");
        for (std::size_t i = 0; i < g.m; ++i)
            for (std::size_t j = 0; j < g.m; ++j) {
                const double w = g.at(i, j);
                if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("Grid: values must lie in [0,1]");
                if (w != g.at(j, i)) throw std::invalid_argument("Grid: values must be symmetric");
            }
    }
};

std::size_t grid_cell(std::size_t m, double u)
{
    return std::min(static_cast<std::size_t>(u * static_cast<double>(m)), m - 1);
}

} // namespace

GraphonSpec::GraphonSpec(Variant v) : v_(std::move(v))
{
    std::visit(Validator{}, v_);
}

double product_form_g(const ProductForm& p, double u)
{
    return std::sqrt(p.rho) * p.lambda * std::pow(u, p.lambda - 1.0);
}

int bin_index(const std::vector<double>& alpha, double u)
{
    const int q = static_cast<int>(alpha.size());
    double sigma = 0.0;
    for (int k = 0; k < q - 1; ++k) {
        sigma += alpha[k];
        if (u < sigma) return k + 1;
    }
    return q;
}

double GraphonSpec::operator()(double u, double v) const
{
    check_unit(u, "u");
    check_unit(v, "v");
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ProductForm>) {
                // multiplication commutes, so W(u,v) == W(v,u) bit for bit
                return product_form_g(s, u) * product_form_g(s, v);
            } else if constexpr (std::is_same_v<T, Blockwise>) {
                return s.pi[bin_index(s.alpha, u) - 1][bin_index(s.alpha, v) - 1];
            } else {
                return s.at(grid_cell(s.m, u), grid_cell(s.m, v));
            }
        },
        v_);
}

double GraphonSpec::mean() const
{
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ProductForm>) {
                // (int g)^2 = (sqrt(rho))^2
                return s.rho;
            } else if constexpr (std::is_same_v<T, Blockwise>) {
                double total = 0.0;
                for (std::size_t q = 0; q < s.alpha.size(); ++q)
                    for (std::size_t l = 0; l < s.alpha.size(); ++l) total += s.alpha[q] * s.alpha[l] * s.pi[q][l];
                return total;
            } else {
                double total = 0.0;
                for (double w : s.values) total += w;
                return total / static_cast<double>(s.values.size());
            }
        },
        v_);
}

// ---------------------------------------------------------------------------
// Samplers

std::pair<Graph, LatentDraw> sample_wgraph(const GraphonSpec& spec, std::size_t n, std::uint64_t seed)
{
    if (n == 0) throw std::invalid_argument("sample_wgraph: n must be >= 1");
    Rng rng(seed);
    LatentDraw latent;
    latent.u.resize(n);
    for (auto& u : latent.u) u = rng.uniform();

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < spec(latent.u[i], latent.u[j]))
                edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));

    if (const auto* b = std::get_if<Blockwise>(&spec.variant())) {
        latent.z.resize(n);
        for (std::size_t i = 0; i < n; ++i) latent.z[i] = bin_index(b->alpha, latent.u[i]);
    }
    return {Graph(n, std::move(edges)), std::move(latent)};
}

std::pair<Graph, LatentDraw> sample_sbm(const std::vector<double>& alpha,
                                        const std::vector<std::vector<double>>& pi,
                                        std::size_t n,
                                        std::uint64_t seed)
{
    return sample_wgraph(GraphonSpec::blockwise(alpha, pi), n, seed);
}

// ---------------------------------------------------------------------------
// Edge lists

EdgeListReadResult parse_edge_list(const std::string& text)
{
    std::unordered_map<std::string, NodeId> index;
    std::vector<std::string> names;
    std::vector<Edge> edges;
    EdgeListReadResult result;

    auto intern = [&](const std::string& name) {
        auto [it, inserted] = index.try_emplace(name, static_cast<NodeId>(names.size()));
        if (inserted) names.push_back(name);
        return it->second;
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(tok);
        if (tokens.empty() || tokens.front().front() == '#') continue;
        if (tokens.size() != 2)
            throw std::runtime_error("edge list line " + std::to_string(lineno) + ": expected two node identifiers, got " +
                                     std::to_string(tokens.size()) + " fields");
        const NodeId a = intern(tokens[0]);
        const NodeId b = intern(tokens[1]);
        if (a == b) {
            ++result.self_loops_dropped;
            continue;
        }
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (names.empty()) throw std::runtime_error("edge list is empty");

    const auto raw = edges.size();
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    result.duplicates_collapsed = raw - edges.size();
    const auto n = names.size();
    result.graph = Graph(n, std::move(edges), std::move(names));
    return result;
}

EdgeListReadResult read_edge_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_edge_list(buf.str());
}

void write_edge_list(const Graph& graph, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list " + path.string());
    const auto& names = graph.names();
    for (const auto& [i, j] : graph.edges()) {
        if (names.empty())
            out << i << ' ' << j << '\n';
        else
            out << names[i] << ' ' << names[j] << '\n';
    }
}

} // namespace wgraph
