#ifndef WGRAPH_GRAPH_HPP
#define WGRAPH_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wgraph {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph. Immutable after construction.
///
/// Edges are kept as a sorted list of pairs (i, j) with i < j, plus sorted
/// per-node neighbour lists for adjacency queries.
class Graph
{
public:
    Graph() = default;

    /// Builds a graph from arbitrary pairs: orientation is normalised,
    /// duplicates are collapsed. Self-loops and out-of-range endpoints throw.
    Graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> names = {});

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::size_t num_pairs() const noexcept { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }
    double density() const noexcept;

    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<NodeId>& neighbors(NodeId i) const { return adjacency_.at(i); }
    std::size_t degree(NodeId i) const { return adjacency_.at(i).size(); }
    bool has_edge(NodeId i, NodeId j) const;

    /// External identifiers; empty when the graph was generated.
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Relabels node i as perm[i].
    Graph permuted(const std::vector<NodeId>& perm) const;

    friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::string> names_;
};

/// Latent variables behind a sampled graph: coordinates in [0,1] for a
/// W-graph, and (for block models) the 1-based class labels.
struct LatentDraw
{
    std::vector<double> u;
    std::vector<int> z;
};

/// W(u,v) = g(u) g(v) with g(u) = sqrt(rho) * lambda * u^(lambda - 1).
struct ProductForm
{
    double rho = 0.1;
    double lambda = 1.0;
};

/// Block-constant graphon: W(u,v) = pi[C(u)][C(v)] with C the binning
/// function of the cumulative proportions of alpha.
struct Blockwise
{
    std::vector<double> alpha;
    std::vector<std::vector<double>> pi;
};

/// Tabulated graphon on an m x m grid of equal cells; values row-major.
struct Grid
{
    std::size_t m = 0;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * m + j]; }
};

class GraphonSpec
{
public:
    using Variant = std::variant<ProductForm, Blockwise, Grid>;

    /// Validates the parameters; throws std::invalid_argument when invalid.
    explicit GraphonSpec(Variant v);

    static GraphonSpec product_form(double rho, double lambda) { return GraphonSpec(ProductForm{rho, lambda}); }
    static GraphonSpec blockwise(std::vector<double> alpha, std::vector<std::vector<double>> pi)
    {
        return GraphonSpec(Blockwise{std::move(alpha), std::move(pi)});
    }
    static GraphonSpec grid(std::size_t m, std::vector<double> values) { return GraphonSpec(Grid{m, std::move(values)}); }
    static GraphonSpec constant(double c) { return blockwise({1.0}, {{c}}); }

    const Variant& variant() const noexcept { return v_; }

    /// W(u, v). Throws std::out_of_range outside [0,1]^2.
    double operator()(double u, double v) const;

    /// Integral of W over the unit square (exact for all variants).
    double mean() const;

private:
    Variant v_;
};

/// 1-based block index of u for cumulative proportions of alpha. Intervals
/// are half-open [sigma_{q-1}, sigma_q); u = 1 maps to the last block.
int bin_index(const std::vector<double>& alpha, double u);

/// g(u) for the product-form family.
double product_form_g(const ProductForm& p, double u);

/// Draws U_i uniform, then X_ij ~ Bernoulli(W(U_i, U_j)) for i < j.
std::pair<Graph, LatentDraw> sample_wgraph(const GraphonSpec& spec, std::size_t n, std::uint64_t seed);

/// SBM sampler. Labels are drawn as Z_i = C_alpha(U_i) from the same uniform
/// stream as sample_wgraph, so both return the same graph for the same seed.
std::pair<Graph, LatentDraw> sample_sbm(const std::vector<double>& alpha,
                                        const std::vector<std::vector<double>>& pi,
                                        std::size_t n,
                                        std::uint64_t seed);

struct EdgeListReadResult
{
    Graph graph;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_collapsed = 0;
};

/// Reads "a b" or "a,b" per line. Blank lines and lines starting with '#'
/// are skipped. Throws std::runtime_error naming the line on malformed input.
EdgeListReadResult read_edge_list(const std::filesystem::path& path);
EdgeListReadResult parse_edge_list(const std::string& text);

/// Writes one "a b" line per edge using node names when present.
void write_edge_list(const Graph& graph, const std::filesystem::path& path);

} // namespace wgraph

#endif
