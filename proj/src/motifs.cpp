#include "wgraph/motifs.hpp"
#include "wgraph/random.hpp"
#include "wgraph/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wgraph {

MotifSpec::MotifSpec(std::string name, std::vector<std::vector<int>> rows) : name_(std::move(name))
{
    k_ = static_cast<int>(rows.size());
    if (k_ < 2 || k_ > 5) throw std::invalid_argument("MotifSpec: k must lie in [2, 5]");
    m_.assign(static_cast<std::size_t>(k_ * k_), 0);
    for (int a = 0; a < k_; ++a) {
        if (static_cast<int>(rows[a].size()) != k_) throw std::invalid_argument("MotifSpec: matrix must be square");
        for (int b = 0; b < k_; ++b) {
            const int x = rows[a][b];
            if (x != 0 && x != 1) throw std::invalid_argument("MotifSpec: entries must be 0 or 1");
            m_[a * k_ + b] = static_cast<std::uint8_t>(x);
        }
    }
    for (int a = 0; a < k_; ++a) {
        if (m_[a * k_ + a] != 0) throw std::invalid_argument("MotifSpec: diagonal must be zero");
        for (int b = a + 1; b < k_; ++b) {
            if (m_[a * k_ + b] != m_[b * k_ + a]) throw std::invalid_argument("MotifSpec: matrix must be symmetric");
            edges_ += m_[a * k_ + b];
        }
    }
    if (edges_ == 0) throw std::invalid_argument("MotifSpec: motif needs at least one edge");
    if (name_.empty()) name_ = row_string();
}

MotifSpec MotifSpec::parse(const std::string& text, std::string name)
{
    std::vector<std::vector<int>> rows;
    std::stringstream in(text);
    for (std::string row; std::getline(in, row, ',');) {
        std::vector<int> r;
        for (char c : row) {
            if (c == '0' || c == '1')
                r.push_back(c - '0');
            else if (!std::isspace(static_cast<unsigned char>(c)))
                throw std::invalid_argument("MotifSpec::parse: unexpected character '" + std::string(1, c) + "'");
        }
        rows.push_back(std::move(r));
    }
    return MotifSpec(std::move(name), std::move(rows));
}

int MotifSpec::degree(int a) const
{
    int d = 0;
    for (int b = 0; b < k_; ++b) d += m_[a * k_ + b];
    return d;
}

std::vector<std::vector<int>> MotifSpec::rows() const
{
    std::vector<std::vector<int>> out(k_, std::vector<int>(k_));
    for (int a = 0; a < k_; ++a)
        for (int b = 0; b < k_; ++b) out[a][b] = m_[a * k_ + b];
    return out;
}

std::string MotifSpec::row_string() const
{
    std::string s;
    for (int a = 0; a < k_; ++a) {
        if (a) s += ',';
        for (int b = 0; b < k_; ++b) s += static_cast<char>('0' + m_[a * k_ + b]);
    }
    return s;
}

MotifSpec MotifSpec::relabeled(const std::vector<int>& perm) const
{
    if (static_cast<int>(perm.size()) != k_) throw std::invalid_argument("MotifSpec::relabeled: size mismatch");
    std::vector<std::vector<int>> r(k_, std::vector<int>(k_, 0));
    for (int a = 0; a < k_; ++a)
        for (int b = 0; b < k_; ++b) r[perm[a]][perm[b]] = m_[a * k_ + b];
    return MotifSpec(name_, std::move(r));
}

const std::vector<MotifSpec>& builtin_motifs()
{
    static const std::vector<MotifSpec> motifs = [] {
        std::vector<MotifSpec> v;
        v.emplace_back("edge", std::vector<std::vector<int>>{{0, 1}, {1, 0}});
        v.emplace_back("path3", std::vector<std::vector<int>>{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});
        v.emplace_back("triangle", std::vector<std::vector<int>>{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
        v.emplace_back("path4", std::vector<std::vector<int>>{{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}});
        v.emplace_back("star4", std::vector<std::vector<int>>{{0, 1, 1, 1}, {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}});
        v.emplace_back("square", std::vector<std::vector<int>>{{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}});
        v.emplace_back("paw", std::vector<std::vector<int>>{{0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 1}, {0, 0, 1, 0}});
        v.emplace_back("diamond", std::vector<std::vector<int>>{{0, 1, 1, 1}, {1, 0, 1, 0}, {1, 1, 0, 1}, {1, 0, 1, 0}});
        v.emplace_back("clique4", std::vector<std::vector<int>>{{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}});
        return v;
    }();
    return motifs;
}

MotifSpec motif_from_string(const std::string& text)
{
    for (const auto& m : builtin_motifs())
        if (m.name() == text) return m;
    if (text.find_first_not_of("01, ") != std::string::npos) throw std::invalid_argument("unknown motif '" + text + "'");
    return MotifSpec::parse(text);
}

const char* to_string(MotifMethod m)
{
    switch (m) {
    case MotifMethod::exact_sbm: return "exact_sbm";
    case MotifMethod::posterior_mean: return "posterior_mean";
    case MotifMethod::product_closed_form: return "product_closed_form";
    case MotifMethod::numeric: return "numeric";
    case MotifMethod::empirical: return "empirical";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Empirical frequency

namespace {

/// Vertex order in which every vertex after the first of its component has
/// an earlier neighbour; parent[d] is such a neighbour's position or -1.
struct SearchPlan
{
    std::vector<int> order;
    std::vector<int> parent;
};

SearchPlan plan_search(const MotifSpec& m)
{
    const int k = m.k();
    SearchPlan plan;
    std::vector<int> position(k, -1);
    for (int root = 0; root < k; ++root) {
        if (position[root] >= 0) continue;
        std::vector<int> queue{root};
        position[root] = static_cast<int>(plan.order.size());
        plan.order.push_back(root);
        plan.parent.push_back(-1);
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const int a = queue[h];
            for (int b = 0; b < k; ++b)
                if (m.edge(a, b) && position[b] < 0) {
                    position[b] = static_cast<int>(plan.order.size());
                    plan.order.push_back(b);
                    plan.parent.push_back(position[a]);
                    queue.push_back(b);
                }
        }
    }
    return plan;
}

class MatchCounter
{
public:
    MatchCounter(const Graph& g, const MotifSpec& m) : g_(g), m_(m), plan_(plan_search(m)), assigned_(m.k()) {}

    std::uint64_t count() { return extend(0); }

private:
    bool consistent(int depth, NodeId x) const
    {
        const int a = plan_.order[depth];
        for (int d = 0; d < depth; ++d) {
            if (assigned_[d] == x) return false;
            if (m_.edge(a, plan_.order[d]) && !g_.has_edge(assigned_[d], x)) return false;
        }
        return true;
    }

    std::uint64_t extend(int depth)
    {
        if (depth == m_.k()) return 1;
        std::uint64_t total = 0;
        auto visit = [&](NodeId x) {
            if (!consistent(depth, x)) return;
            assigned_[depth] = x;
            total += extend(depth + 1);
        };
        const int p = plan_.parent[depth];
        if (p >= 0) {
            for (NodeId x : g_.neighbors(assigned_[p])) visit(x);
        } else {
            for (NodeId x = 0; x < g_.num_nodes(); ++x) visit(x);
        }
        return total;
    }

    const Graph& g_;
    const MotifSpec& m_;
    SearchPlan plan_;
    std::vector<NodeId> assigned_;
};

} // namespace

MotifProbability empirical_frequency(const Graph& graph, const MotifSpec& motif, FrequencyMode mode)
{
    const auto n = graph.num_nodes();
    const auto k = static_cast<std::size_t>(motif.k());
    if (k > n) throw std::invalid_argument("empirical_frequency: motif has more nodes than the graph");
    MotifProbability out;
    out.method = MotifMethod::empirical;

    if (mode.samples == 0) {
        const auto matches = MatchCounter(graph, motif).count();
        double tuples = 1.0;
        for (std::size_t a = 0; a < k; ++a) tuples *= static_cast<double>(n - a);
        out.value = static_cast<double>(matches) / tuples;
        return out;
    }

    Rng rng(mode.seed);
    std::vector<NodeId> tuple(k);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < mode.samples; ++s) {
        for (std::size_t a = 0; a < k; ++a) {
            NodeId x;
            do x = static_cast<NodeId>(rng.index(n)); while (std::find(tuple.begin(), tuple.begin() + a, x) != tuple.begin() + a);
            tuple[a] = x;
        }
        bool all = true;
        for (int a = 0; a < motif.k() && all; ++a)
            for (int b = a + 1; b < motif.k() && all; ++b)
                if (motif.edge(a, b) && !graph.has_edge(tuple[a], tuple[b])) all = false;
        hits += all;
    }
    const double N = static_cast<double>(mode.samples);
    out.value = static_cast<double>(hits) / N;
    out.se = std::sqrt(out.value * (1.0 - out.value) / N);
    return out;
}

// ---------------------------------------------------------------------------
// Model-based probabilities

namespace {

void check_labeling_space(int Q, int k)
{
    double total = 1.0;
    for (int a = 0; a < k; ++a) total *= Q;
    if (total > static_cast<double>(kMaxLabelings))
        throw std::invalid_argument("motif labeling space Q^k exceeds " + std::to_string(kMaxLabelings));
}

/// Calls fn(c) for every c in {0..Q-1}^k (mixed-radix counter).
template <class Fn>
void for_each_labeling(int Q, int k, Fn&& fn)
{
    std::vector<int> c(k, 0);
    for (;;) {
        fn(c);
        int a = 0;
        while (a < k && ++c[a] == Q) c[a++] = 0;
        if (a == k) return;
    }
}

/// log Gamma(x + e) - log Gamma(x) for integer e >= 0.
double log_rising(double x, int e)
{
    double s = 0.0;
    for (int i = 0; i < e; ++i) s += std::log(x + i);
    return s;
}

} // namespace

double mu_sbm(const std::vector<double>& alpha, const std::vector<std::vector<double>>& pi, const MotifSpec& motif)
{
    // reuse the graphon validator for (alpha, pi)
    GraphonSpec::blockwise(alpha, pi);
    const int Q = static_cast<int>(alpha.size());
    const int k = motif.k();
    check_labeling_space(Q, k);

    special::CompensatedSum total;
    for_each_labeling(Q, k, [&](const std::vector<int>& c) {
        double term = 1.0;
        for (int a = 0; a < k; ++a) term *= alpha[c[a]];
        for (int a = 0; a < k && term > 0.0; ++a)
            for (int b = a + 1; b < k; ++b)
                if (motif.edge(a, b)) term *= pi[c[a]][c[b]];
        total.add(term);
    });
    return std::clamp(total.value(), 0.0, 1.0);
}

double mu_product_form(double rho, double lambda, const MotifSpec& motif)
{
    GraphonSpec::product_form(rho, lambda);
    const double base = std::sqrt(rho) * lambda;
    double mu = 1.0;
    for (int a = 0; a < motif.k(); ++a) {
        const int h = motif.degree(a);
        mu *= std::pow(base, h) / (h * lambda - h + 1.0);
    }
    return mu;
}

double mu_product_form(const std::function<double(double)>& g, const MotifSpec& motif)
{
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> xi(motif.k() + 1, -1.0);
    double mu = 1.0;
    for (int a = 0; a < motif.k(); ++a) {
        const int h = motif.degree(a);
        if (xi[h] < 0.0) xi[h] = gauss_kronrod<double, 31>::integrate([&](double z) { return std::pow(g(z), h); }, 0.0, 1.0, 15, 1e-12);
        mu *= xi[h];
    }
    return mu;
}

MotifProbability mu_numeric(const GraphonSpec& spec, const MotifSpec& motif, std::uint64_t draws, std::uint64_t seed)
{
    if (draws == 0) throw std::invalid_argument("mu_numeric: need at least one draw");
    Rng rng(seed);
    const int k = motif.k();
    std::vector<double> u(k);
    special::CompensatedSum s1, s2;
    for (std::uint64_t d = 0; d < draws; ++d) {
        for (auto& x : u) x = rng.uniform();
        double y = 1.0;
        for (int a = 0; a < k && y > 0.0; ++a)
            for (int b = a + 1; b < k; ++b)
                if (motif.edge(a, b)) y *= spec(u[a], u[b]);
        s1.add(y);
        s2.add(y * y);
    }
    const double N = static_cast<double>(draws);
    const double mean = s1.value() / N;
    const double var = std::max(0.0, s2.value() / N - mean * mean);
    return {mean, MotifMethod::numeric, std::sqrt(var / N)};
}

double mu_posterior_mean(const VariationalPosterior& post, const MotifSpec& motif)
{
    const int Q = post.Q;
    const int k = motif.k();
    check_labeling_space(Q, k);
    const int E = motif.num_edges();

    // Beta moment ratios E[pi^e] = Gamma(eta + e) Gamma(eta + zeta) / (Gamma(eta) Gamma(eta + zeta + e))
    std::vector<double> log_beta_moment(static_cast<std::size_t>(Q * Q * (E + 1)));
    auto beta_index = [&](int q, int l, int e) { return static_cast<std::size_t>((q * Q + l) * (E + 1) + e); };
    for (int q = 0; q < Q; ++q)
        for (int l = q; l < Q; ++l)
            for (int e = 0; e <= E; ++e)
                log_beta_moment[beta_index(q, l, e)] =
                    log_rising(post.eta(q, l), e) - log_rising(post.eta(q, l) + post.zeta(q, l), e);

    // Dirichlet moment ratios, with the posterior parameters a playing the role of n_q
    std::vector<double> log_alpha_moment(static_cast<std::size_t>(Q * (k + 1)));
    for (int q = 0; q < Q; ++q)
        for (int c = 0; c <= k; ++c) log_alpha_moment[q * (k + 1) + c] = log_rising(post.a(q), c);
    const double log_norm = log_rising(post.a.sum(), k);

    std::vector<int> counts(Q), edge_counts(Q * Q);
    special::CompensatedSum total;
    for_each_labeling(Q, k, [&](const std::vector<int>& c) {
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(edge_counts.begin(), edge_counts.end(), 0);
        for (int a = 0; a < k; ++a) ++counts[c[a]];
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (motif.edge(a, b)) ++edge_counts[std::min(c[a], c[b]) * Q + std::max(c[a], c[b])];
        double log_term = -log_norm;
        for (int q = 0; q < Q; ++q) log_term += log_alpha_moment[q * (k + 1) + counts[q]];
        for (int q = 0; q < Q; ++q)
            for (int l = q; l < Q; ++l)
                if (edge_counts[q * Q + l] > 0) log_term += log_beta_moment[beta_index(q, l, edge_counts[q * Q + l])];
        total.add(std::exp(log_term));
    });
    const double mu = total.value();
    if (!std::isfinite(mu)) throw std::runtime_error("mu_posterior_mean: non-finite result");
    return std::clamp(mu, 0.0, 1.0);
}

double mu_averaged(const FitEnsemble& ens, const MotifSpec& motif)
{
    double mu = 0.0;
    for (int Q = 1; Q <= ens.q_max(); ++Q) {
        const double w = ens.weights[Q - 1];
        if (w > 0.0 && ens.fits[Q - 1]) mu += w * mu_posterior_mean(*ens.fits[Q - 1], motif);
    }
    return mu;
}

double mu_map(const FitEnsemble& ens, const MotifSpec& motif) { return mu_posterior_mean(ens.map_fit(), motif); }

} // namespace wgraph
