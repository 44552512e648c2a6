#include "wgraph/vbem.hpp"
#include "wgraph/parallel.hpp"
#include "wgraph/random.hpp"
#include "wgraph/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wgraph {

namespace {

constexpr double kTauFloor = 1e-12;

/// Sum of a permutation-invariant multiset, independent of input order.
double canonical_sum(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

struct EdgeStats
{
    Matrix on;   // expected edge counts between groups (diagonal: pairs i < j)
    Matrix off;  // expected non-edge counts
    Vector size; // sum_i tau_iq
};

EdgeStats edge_stats(const Graph& graph, const LabelMatrix& tau)
{
    const auto Q = tau.cols();
    EdgeStats s;
    s.size = tau.colwise().sum().transpose();
    Matrix m = Matrix::Zero(Q, Q);
    for (const auto& [i, j] : graph.edges()) {
        const auto ti = tau.row(i).transpose();
        const auto tj = tau.row(j).transpose();
        m.noalias() += ti * tj.transpose();
    }
    m = m + m.transpose().eval();
    // all ordered pairs i != j
    Matrix pairs = s.size * s.size.transpose() - tau.transpose() * tau;
    s.on = m;
    s.off = pairs - m;
    s.on.diagonal() *= 0.5;
    s.off.diagonal() *= 0.5;
    // guard tiny negative round-off in the non-edge counts
    s.off = s.off.cwiseMax(0.0);
    return s;
}

double label_entropy(const LabelMatrix& tau)
{
    double h = 0.0;
    for (Eigen::Index i = 0; i < tau.rows(); ++i)
        for (Eigen::Index q = 0; q < tau.cols(); ++q) {
            const double t = tau(i, q);
            if (t > 0.0) h -= t * std::log(t);
        }
    return h;
}

void check_dimensions(const Graph& graph, const VariationalPosterior& post, const SbmPrior& prior)
{
    const auto Q = post.Q;
    if (prior.num_groups() != Q || post.a.size() != Q || post.eta.rows() != Q || post.eta.cols() != Q ||
        post.zeta.rows() != Q || post.zeta.cols() != Q || post.tau.cols() != Q ||
        post.tau.rows() != static_cast<Eigen::Index>(graph.num_nodes()))
        throw std::invalid_argument("posterior, prior and graph dimensions disagree");
}

void normalise_row(LabelMatrix& tau, Eigen::Index i)
{
    auto row = tau.row(i);
    row = row.cwiseMax(kTauFloor);
    row /= row.sum();
}

/// One Gauss-Seidel sweep of the label update over all nodes.
void label_sweep(const Graph& graph, LabelMatrix& tau, const VariationalPosterior& post)
{
    const auto Q = post.Q;
    const double psi_total = special::digamma(post.a.sum());
    Vector log_prop(Q);
    Matrix edge_term(Q, Q), pair_term(Q, Q);
    for (int q = 0; q < Q; ++q) {
        log_prop(q) = special::digamma(post.a(q)) - psi_total;
        for (int l = 0; l < Q; ++l) {
            const double eta = post.eta(q, l), zeta = post.zeta(q, l);
            edge_term(q, l) = special::digamma(eta) - special::digamma(zeta);
            pair_term(q, l) = special::digamma(zeta) - special::digamma(eta + zeta);
        }
    }

    Vector total = tau.colwise().sum().transpose();
    Vector neigh(Q), logit(Q);
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        neigh.setZero();
        for (NodeId j : graph.neighbors(static_cast<NodeId>(i))) neigh += tau.row(j).transpose();
        const Vector others = total - tau.row(i).transpose();
        logit = log_prop + edge_term * neigh + pair_term * others;
        const double top = logit.maxCoeff();
        const Vector old = tau.row(i).transpose();
        tau.row(i) = (logit.array() - top).exp().matrix().transpose();
        normalise_row(tau, i);
        total += tau.row(i).transpose() - old;
    }
}

LabelMatrix smoothed_hard_labels(const std::vector<int>& labels, int Q)
{
    const auto n = static_cast<Eigen::Index>(labels.size());
    LabelMatrix tau(n, Q);
    const double off = Q > 1 ? 0.05 / (Q - 1) : 0.0;
    tau.setConstant(off);
    for (Eigen::Index i = 0; i < n; ++i) tau(i, labels[i]) = Q > 1 ? 0.95 : 1.0;
    return tau;
}

std::vector<int> degree_quantile_labels(const Graph& graph, int Q)
{
    const auto n = graph.num_nodes();
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId x, NodeId y) { return graph.degree(x) < graph.degree(y); });
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[order[r]] = static_cast<int>(r * static_cast<std::size_t>(Q) / n);
    return labels;
}

/// Lloyd's algorithm on adjacency rows with k-means++ seeding.
std::vector<int> kmeans_labels(const Graph& graph, int Q, Rng& rng)
{
    const auto n = static_cast<Eigen::Index>(graph.num_nodes());
    Matrix rows = Matrix::Zero(n, n);
    for (const auto& [i, j] : graph.edges()) {
        rows(i, j) = 1.0;
        rows(j, i) = 1.0;
    }
    const int k = static_cast<int>(std::min<Eigen::Index>(Q, n));
    Matrix centers(k, n);
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    centers.row(0) = rows.row(static_cast<Eigen::Index>(rng.index(n)));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], (rows.row(i) - centers.row(c - 1)).squaredNorm());
            total += dist[i];
        }
        Eigen::Index pick = static_cast<Eigen::Index>(rng.index(n));
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= dist[i];
                if (r < 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = rows.row(pick);
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (rows.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) changed = true;
            labels[i] = best;
        }
        if (!changed && iter > 0) break;
        Matrix sums = Matrix::Zero(k, n);
        std::vector<int> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[i]) += rows.row(i);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    }
    return labels;
}

LabelMatrix random_labels(std::size_t n, int Q, Rng& rng)
{
    LabelMatrix tau(static_cast<Eigen::Index>(n), Q);
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        for (int q = 0; q < Q; ++q) tau(i, q) = rng.gamma(1.0);
        tau.row(i) /= tau.row(i).sum();
    }
    return tau;
}

LabelMatrix initial_labels(const Graph& graph, int Q, int restart, Rng& rng)
{
    if (restart == 0) return smoothed_hard_labels(degree_quantile_labels(graph, Q), Q);
    if (restart % 2 == 1) return smoothed_hard_labels(kmeans_labels(graph, Q, rng), Q);
    return random_labels(graph.num_nodes(), Q, rng);
}

} // namespace

// ---------------------------------------------------------------------------

SbmPrior SbmPrior::uniform(int Q)
{
    if (Q < 1) throw std::invalid_argument("SbmPrior: Q must be >= 1");
    return SbmPrior{Vector::Ones(Q), Matrix::Ones(Q, Q), Matrix::Ones(Q, Q)};
}

void SbmPrior::validate() const
{
    const auto Q = a0.size();
    if (Q < 1 || eta0.rows() != Q || eta0.cols() != Q || zeta0.rows() != Q || zeta0.cols() != Q)
        throw std::invalid_argument("SbmPrior: inconsistent dimensions");
    if ((a0.array() <= 0.0).any() || (eta0.array() <= 0.0).any() || (zeta0.array() <= 0.0).any())
        throw std::invalid_argument("SbmPrior: hyperparameters must be positive");
    if (eta0 != eta0.transpose() || zeta0 != zeta0.transpose())
        throw std::invalid_argument("SbmPrior: eta0 and zeta0 must be symmetric");
}

VariationalPosterior posterior_from_labels(const Graph& graph, LabelMatrix tau, const SbmPrior& prior)
{
    const auto stats = edge_stats(graph, tau);
    VariationalPosterior post;
    post.Q = prior.num_groups();
    post.a = prior.a0 + stats.size;
    post.eta = prior.eta0 + stats.on;
    post.zeta = prior.zeta0 + stats.off;
    post.tau = std::move(tau);
    post.elbo = elbo(graph, post, prior);
    return post;
}

double elbo(const Graph& graph, const VariationalPosterior& post, const SbmPrior& prior)
{
    check_dimensions(graph, post, prior);
    double j = 0.0;
    for (int q = 0; q < post.Q; ++q)
        for (int l = q; l < post.Q; ++l)
            j += special::log_beta(post.eta(q, l), post.zeta(q, l)) -
                 special::log_beta(prior.eta0(q, l), prior.zeta0(q, l));
    j += special::log_dirichlet_norm({post.a.data(), static_cast<std::size_t>(post.a.size())});
    j -= special::log_dirichlet_norm({prior.a0.data(), static_cast<std::size_t>(prior.a0.size())});
    j += label_entropy(post.tau);
    return j;
}

double elbo_functional(const Graph& graph, const VariationalPosterior& post, const SbmPrior& prior)
{
    using special::digamma;
    check_dimensions(graph, post, prior);
    const auto stats = edge_stats(graph, post.tau);
    const int Q = post.Q;

    double j = 0.0;
    const double psi_a = digamma(post.a.sum());
    for (int q = 0; q < Q; ++q) {
        const double e_log_alpha = digamma(post.a(q)) - psi_a;
        // E log p(Z | alpha) + E log p(alpha) - E log q(alpha), kernel parts
        j += (stats.size(q) + prior.a0(q) - post.a(q)) * e_log_alpha;
    }
    j += special::log_dirichlet_norm({post.a.data(), static_cast<std::size_t>(Q)});
    j -= special::log_dirichlet_norm({prior.a0.data(), static_cast<std::size_t>(Q)});

    for (int q = 0; q < Q; ++q)
        for (int l = q; l < Q; ++l) {
            const double eta = post.eta(q, l), zeta = post.zeta(q, l);
            const double psi_sum = digamma(eta + zeta);
            const double e_log_pi = digamma(eta) - psi_sum;
            const double e_log_1m = digamma(zeta) - psi_sum;
            j += (stats.on(q, l) + prior.eta0(q, l) - eta) * e_log_pi;
            j += (stats.off(q, l) + prior.zeta0(q, l) - zeta) * e_log_1m;
            j += special::log_beta(eta, zeta) - special::log_beta(prior.eta0(q, l), prior.zeta0(q, l));
        }
    j += label_entropy(post.tau);
    return j;
}

VariationalPosterior fit_from(const Graph& graph, LabelMatrix tau, const SbmPrior& prior, const FitConfig& config)
{
    prior.validate();
    if (graph.num_nodes() == 0) throw std::invalid_argument("fit: empty graph");
    if (tau.rows() != static_cast<Eigen::Index>(graph.num_nodes()) || tau.cols() != prior.num_groups())
        throw std::invalid_argument("fit: initial labels have the wrong shape");
    for (Eigen::Index i = 0; i < tau.rows(); ++i) normalise_row(tau, i);

    auto post = posterior_from_labels(graph, std::move(tau), prior);
    post.elbo_trace.push_back(post.elbo);
    if (!std::isfinite(post.elbo)) throw FitError("non-finite lower bound at initialisation");

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        LabelMatrix next = post.tau;
        label_sweep(graph, next, post);
        auto trace = std::move(post.elbo_trace);
        const double previous = post.elbo;
        post = posterior_from_labels(graph, std::move(next), prior);
        post.elbo_trace = std::move(trace);
        post.elbo_trace.push_back(post.elbo);
        post.iterations = iter;
        if (!std::isfinite(post.elbo)) throw FitError("non-finite lower bound at iteration " + std::to_string(iter));
        if (std::abs(post.elbo - previous) <= config.tol * std::abs(previous)) {
            post.converged = true;
            break;
        }
    }
    return post;
}

VariationalPosterior fit(const Graph& graph, int Q, const SbmPrior& prior, const FitConfig& config)
{
    if (Q < 1) throw std::invalid_argument("fit: Q must be >= 1");
    if (prior.num_groups() != Q) throw std::invalid_argument("fit: prior has the wrong number of groups");
    if (graph.num_nodes() == 0) throw std::invalid_argument("fit: empty graph");

    const int restarts = Q == 1 ? 1 : std::max(1, config.restarts);
    std::optional<VariationalPosterior> best;
    std::string last_error;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(Q), static_cast<std::uint64_t>(r)}));
        try {
            auto post = fit_from(graph, initial_labels(graph, Q, r, rng), prior, config);
            if (!best || post.elbo > best->elbo) best = std::move(post);
        } catch (const FitError& e) {
            last_error = e.what();
        }
    }
    if (!best) throw FitError("all " + std::to_string(restarts) + " restarts failed for Q=" + std::to_string(Q) + ": " + last_error);
    return sort_identifiable(std::move(*best));
}

std::vector<double> block_degrees(const VariationalPosterior& post)
{
    const auto Q = post.Q;
    std::vector<double> a(post.a.data(), post.a.data() + Q);
    const double total = canonical_sum(a);
    std::vector<double> d(Q);
    for (int q = 0; q < Q; ++q) {
        std::vector<double> terms(Q);
        for (int l = 0; l < Q; ++l) terms[l] = (post.a(l) / total) * (post.eta(q, l) / (post.eta(q, l) + post.zeta(q, l)));
        d[q] = canonical_sum(std::move(terms));
    }
    return d;
}

VariationalPosterior permute_groups(const VariationalPosterior& post, const std::vector<int>& perm)
{
    const int Q = post.Q;
    if (static_cast<int>(perm.size()) != Q) throw std::invalid_argument("permute_groups: size mismatch");
    VariationalPosterior out = post;
    for (int q = 0; q < Q; ++q) {
        out.a(perm[q]) = post.a(q);
        out.tau.col(perm[q]) = post.tau.col(q);
        for (int l = 0; l < Q; ++l) {
            out.eta(perm[q], perm[l]) = post.eta(q, l);
            out.zeta(perm[q], perm[l]) = post.zeta(q, l);
        }
    }
    return out;
}

VariationalPosterior sort_identifiable(VariationalPosterior post)
{
    const auto d = block_degrees(post);
    std::vector<int> order(post.Q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
    std::vector<int> perm(post.Q);
    for (int r = 0; r < post.Q; ++r) perm[order[r]] = r;
    if (std::is_sorted(order.begin(), order.end())) return post;
    return permute_groups(post, perm);
}

std::vector<double> model_weights(const std::vector<double>& elbos)
{
    std::vector<double> finite;
    for (double e : elbos)
        if (std::isfinite(e)) finite.push_back(e);
    std::vector<double> w(elbos.size(), 0.0);
    if (finite.empty()) return w;
    const double top = *std::max_element(finite.begin(), finite.end());
    double total = 0.0;
    for (std::size_t i = 0; i < elbos.size(); ++i)
        if (std::isfinite(elbos[i])) total += w[i] = std::exp(elbos[i] - top);
    for (auto& x : w) x /= total;
    return w;
}

const VariationalPosterior& FitEnsemble::fit(int Q) const
{
    if (Q < 1 || Q > q_max()) throw std::out_of_range("FitEnsemble: Q out of range");
    if (!fits[Q - 1]) throw FitError("FitEnsemble: fit for Q=" + std::to_string(Q) + " failed");
    return *fits[Q - 1];
}

std::vector<double> FitEnsemble::elbos() const
{
    std::vector<double> e;
    for (const auto& f : fits) e.push_back(f ? f->elbo : -std::numeric_limits<double>::infinity());
    return e;
}

FitEnsemble fit_ensemble(const Graph& graph,
                         int q_max,
                         const PriorFamily& prior_family,
                         const FitConfig& config,
                         unsigned threads)
{
    if (q_max < 1) throw std::invalid_argument("fit_ensemble: q_max must be >= 1");
    FitEnsemble ens;
    ens.fits.resize(q_max);
    std::vector<std::string> errors(q_max);
    parallel_for(static_cast<std::size_t>(q_max), threads, [&](std::size_t k) {
        const int Q = static_cast<int>(k) + 1;
        FitConfig cfg = config;
        cfg.seed = derive_seed(config.seed, {0x51ULL, static_cast<std::uint64_t>(Q)});
        try {
            ens.fits[k] = fit(graph, Q, prior_family(Q), cfg);
        } catch (const FitError& e) {
            errors[k] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) ens.warnings.push_back(e);
    if (std::none_of(ens.fits.begin(), ens.fits.end(), [](const auto& f) { return f.has_value(); }))
        throw FitError("fit_ensemble: every Q failed");

    const auto e = ens.elbos();
    ens.weights = model_weights(e);
    ens.map_q = static_cast<int>(std::max_element(e.begin(), e.end()) - e.begin()) + 1;
    return ens;
}

FitEnsemble fit_ensemble(const Graph& graph, int q_max, const FitConfig& config, unsigned threads)
{
    return fit_ensemble(graph, q_max, &SbmPrior::uniform, config, threads);
}

} // namespace wgraph
