#ifndef WGRAPH_VBEM_HPP
#define WGRAPH_VBEM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgraph/graph.hpp"

namespace wgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// n x Q soft labels, one node per row.
using LabelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Conjugate priors: alpha ~ Dir(a0), pi_ql ~ Beta(eta0_ql, zeta0_ql).
struct SbmPrior
{
    Vector a0;
    Matrix eta0;
    Matrix zeta0;

    int num_groups() const noexcept { return static_cast<int>(a0.size()); }

    /// a0 = 1, eta0 = zeta0 = 1.
    static SbmPrior uniform(int Q);

    /// Throws std::invalid_argument on non-positive or asymmetric entries.
    void validate() const;
};

using PriorFamily = std::function<SbmPrior(int)>;

/// Variational posterior q(alpha) q(pi) q(Z) of a Q-group SBM.
struct VariationalPosterior
{
    int Q = 0;
    Vector a;
    Matrix eta;
    Matrix zeta;
    LabelMatrix tau;
    double elbo = 0.0;

    /// J after the initial M-step and after every iteration.
    std::vector<double> elbo_trace;
    int iterations = 0;
    bool converged = false;

    /// Plug-in estimates: posterior means of alpha and pi.
    Vector alpha_mean() const { return a / a.sum(); }
    Matrix pi_mean() const { return eta.array() / (eta + zeta).array(); }
};

struct FitConfig
{
    int max_iter = 500;
    double tol = 1e-6;
    int restarts = 5;
    std::uint64_t seed = 0;
};

class FitError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Parameter update given soft labels: a = a0 + sum_i tau_i, and eta, zeta
/// from expected edge and non-edge counts between groups. Sets elbo.
VariationalPosterior posterior_from_labels(const Graph& graph, LabelMatrix tau, const SbmPrior& prior);

/// One coordinate-ascent run from the given soft labels. Node rows are
/// updated in place one at a time (each update is an exact block maximiser
/// of J), then the parameters are refreshed. Stops when the relative change of
/// J falls below config.tol or after config.max_iter iterations. Throws
/// FitError on a non-finite J. Classes are left in their working order.
VariationalPosterior fit_from(const Graph& graph, LabelMatrix tau0, const SbmPrior& prior, const FitConfig& config);

/// Best of config.restarts initialisations (degree quantiles, k-means on
/// adjacency rows, random soft labels), sorted with sort_identifiable.
VariationalPosterior fit(const Graph& graph, int Q, const SbmPrior& prior, const FitConfig& config);

/// Closed-form lower bound, valid when (a, eta, zeta) are the parameter
/// update of tau:
///   J = log B(eta, zeta) - log B(eta0, zeta0) summed over q <= l
///     + log D(a) - log D(a0) - sum tau log tau
/// with B the Beta function and D the Dirichlet normaliser.
double elbo(const Graph& graph, const VariationalPosterior& posterior, const SbmPrior& prior);

/// The full functional J(q_theta, q_Z) for arbitrary (a, eta, zeta, tau).
/// Agrees with elbo() when the parameters are consistent with tau.
double elbo_functional(const Graph& graph, const VariationalPosterior& posterior, const SbmPrior& prior);

/// d_q = sum_l alpha_l pi_ql from the posterior means.
std::vector<double> block_degrees(const VariationalPosterior& posterior);

/// Relabels groups so block_degrees is nondecreasing; ties keep their order.
VariationalPosterior sort_identifiable(VariationalPosterior posterior);

/// Applies perm (new index of old group q is perm[q]) to tau, a, eta, zeta.
VariationalPosterior permute_groups(const VariationalPosterior& posterior, const std::vector<int>& perm);

/// exp(elbo) normalised; non-finite entries get weight 0.
std::vector<double> model_weights(const std::vector<double>& elbos);

struct FitEnsemble
{
    /// fits[Q - 1]; empty when every restart failed for that Q.
    std::vector<std::optional<VariationalPosterior>> fits;
    std::vector<double> weights;
    int map_q = 0;
    std::vector<std::string> warnings;

    int q_max() const noexcept { return static_cast<int>(fits.size()); }
    const VariationalPosterior& fit(int Q) const;
    const VariationalPosterior& map_fit() const { return fit(map_q); }
    std::vector<double> elbos() const;
};

/// Fits Q = 1..q_max. Each Q uses a seed derived from config.seed and Q, so
/// the result does not depend on `threads`.
FitEnsemble fit_ensemble(const Graph& graph,
                         int q_max,
                         const PriorFamily& prior_family,
                         const FitConfig& config,
                         unsigned threads = 1);

FitEnsemble fit_ensemble(const Graph& graph, int q_max, const FitConfig& config, unsigned threads = 1);

} // namespace wgraph

#endif
