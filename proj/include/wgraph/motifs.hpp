#ifndef WGRAPH_MOTIFS_HPP
#define WGRAPH_MOTIFS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wgraph/graph.hpp"
#include "wgraph/vbem.hpp"

namespace wgraph {

/// Pattern of required edges on k nodes (non-induced: other pairs are free).
class MotifSpec
{
public:
    /// Rows of the 0/1 adjacency matrix. Throws std::invalid_argument unless
    /// square, 2 <= k <= 5, symmetric, zero diagonal, with at least one edge.
    MotifSpec(std::string name, std::vector<std::vector<int>> rows);

    /// Parses "0110,1010,1101,0010"-style row strings.
    static MotifSpec parse(const std::string& rows, std::string name = {});

    const std::string& name() const noexcept { return name_; }
    int k() const noexcept { return k_; }
    bool edge(int a, int b) const { return m_[a * k_ + b] != 0; }
    int degree(int a) const;
    int num_edges() const noexcept { return edges_; }
    std::vector<std::vector<int>> rows() const;
    std::string row_string() const;

    /// Conjugation by a vertex permutation: vertex a becomes perm[a].
    MotifSpec relabeled(const std::vector<int>& perm) const;

private:
    std::string name_;
    int k_ = 0;
    int edges_ = 0;
    std::vector<std::uint8_t> m_;
};

/// edge, path3, triangle, path4, star4, square, paw, diamond, clique4.
const std::vector<MotifSpec>& builtin_motifs();

/// Looks up a builtin by name, otherwise parses row strings.
MotifSpec motif_from_string(const std::string& text);

enum class MotifMethod { exact_sbm, posterior_mean, product_closed_form, numeric, empirical };

const char* to_string(MotifMethod m);

struct MotifProbability
{
    double value = 0.0;
    MotifMethod method = MotifMethod::exact_sbm;
    /// Monte-Carlo standard error; 0 for exact methods.
    double se = 0.0;
};

struct FrequencyMode
{
    /// 0 means every ordered k-tuple of distinct nodes.
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    static FrequencyMode exhaustive() { return {}; }
    static FrequencyMode sampled(std::uint64_t n, std::uint64_t seed) { return {n, seed}; }
};

/// Fraction of ordered k-tuples of distinct nodes carrying all motif edges.
/// The exhaustive mode counts matches by backtracking over neighbour lists.
MotifProbability empirical_frequency(const Graph& graph, const MotifSpec& motif, FrequencyMode mode);

/// Labelings c in {0..Q-1}^k are enumerated only when Q^k <= this.
constexpr std::uint64_t kMaxLabelings = 1'000'000;

/// Exact SBM occurrence probability:
///   sum_c prod_a alpha_{c_a} prod_{a<b} pi_{c_a c_b}^{m_ab}.
double mu_sbm(const std::vector<double>& alpha, const std::vector<std::vector<double>>& pi, const MotifSpec& motif);

/// Product-form graphon W(u,v) = g(u) g(v): prod_a xi_{deg(a)} with
/// xi_h = int_0^1 g^h. The (rho, lambda) family has
/// xi_h = (sqrt(rho) lambda)^h / (h lambda - h + 1).
double mu_product_form(double rho, double lambda, const MotifSpec& motif);
double mu_product_form(const std::function<double(double)>& g, const MotifSpec& motif);

/// Monte-Carlo estimate of int prod_{a<b} W(u_a, u_b)^{m_ab} du over [0,1]^k.
MotifProbability mu_numeric(const GraphonSpec& spec, const MotifSpec& motif, std::uint64_t draws, std::uint64_t seed);

/// Posterior mean of mu_sbm under alpha ~ Dir(a), pi_ql ~ Beta(eta_ql, zeta_ql)
/// independently: sum over labelings of products of Beta and Dirichlet
/// moment ratios, evaluated with log-gamma differences.
double mu_posterior_mean(const VariationalPosterior& posterior, const MotifSpec& motif);

/// Model-weighted average of mu_posterior_mean over the ensemble.
double mu_averaged(const FitEnsemble& ensemble, const MotifSpec& motif);

/// mu_posterior_mean at the MAP number of groups.
double mu_map(const FitEnsemble& ensemble, const MotifSpec& motif);

} // namespace wgraph

#endif
