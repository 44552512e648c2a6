#ifndef WGRAPH_GRAPHON_POSTERIOR_HPP
#define WGRAPH_GRAPHON_POSTERIOR_HPP

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "wgraph/graph.hpp"
#include "wgraph/vbem.hpp"

namespace wgraph {

/// Dirichlet parameters together with their running sums s_q = a_1 + ... + a_q.
class DirichletParams
{
public:
    explicit DirichletParams(std::vector<double> a);
    explicit DirichletParams(const Vector& a) : DirichletParams(std::vector<double>(a.data(), a.data() + a.size())) {}

    int size() const noexcept { return static_cast<int>(a_.size()); }
    const std::vector<double>& a() const noexcept { return a_; }
    /// s(0) = 0, s(size()) = total.
    double s(int q) const { return s_.at(q); }

private:
    std::vector<double> a_;
    std::vector<double> s_;
};

class QuadratureError : public std::runtime_error
{
public:
    QuadratureError(const std::string& what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// P(first component < x) for (p1, p2, p3) ~ Dir(a3), i.e. the
/// Beta(a1, a2 + a3) cdf.
double dirichlet_cdf_uni(double x, const std::array<double, 3>& a3);

/// P(p1 < x, p3 < y) for (p1, p2, p3) ~ Dir(a3). Conditioning on p1 = t,
/// p3 / (1 - t) ~ Beta(a3, a2), so the value is
///   int_0^min(x,1) beta_pdf(t; a1, a2 + a3) * beta_cdf(y / (1 - t); a3, a2) dt.
/// The part with t >= 1 - y has a closed form; the rest is integrated with
/// adaptive Gauss-Kronrod. Throws QuadratureError when the error estimate
/// exceeds 1e-8.
double dirichlet_cdf_biv(double x, double y, const std::array<double, 3>& a3);

/// F_{q,l}(u, v) = P(sigma_q < u, sigma_l < v) for the cumulative
/// proportions sigma of alpha ~ Dir(a), with 0 <= q, l <= Q.
///
/// Boundary indices: sigma_0 = 0 counts as below every u in [0, 1] and
/// sigma_Q = 1 as above every u, which matches the binning convention
/// C(u) = q iff sigma_{q-1} <= u < sigma_q (and C(1) = Q).
double joint_sigma_cdf(int q, int l, double u, double v, const DirichletParams& d);

/// P(C(u) = q, C(v) = l) under the posterior of alpha, for u <= v. Entries
/// with q > l are zero.
struct CellWeights
{
    int Q = 0;
    Matrix w;

    double at(int q, int l) const { return w(q - 1, l - 1); } // 1-based
    double sum() const { return w.sum(); }
};

/// Throws std::runtime_error if an entry is below -1e-10 or the weights do
/// not sum to 1 within 1e-4. Swaps u and v when u > v.
CellWeights cell_weights(double u, double v, const VariationalPosterior& posterior);

/// Mixture density sum_{q<=l} w_ql beta_pdf(w; eta_ql, zeta_ql) of W(u, v).
std::vector<double> posterior_pdf(double u, double v, const VariationalPosterior& posterior, std::span<const double> w_grid);

/// Mixture cdf, the same mixture as posterior_pdf.
std::vector<double> posterior_cdf(double u, double v, const VariationalPosterior& posterior, std::span<const double> w_grid);

double posterior_mean(double u, double v, const VariationalPosterior& posterior);
double posterior_sd(double u, double v, const VariationalPosterior& posterior);

/// Model-averaged versions. Models whose weight is below 1e-12 are skipped
/// and the remaining weights renormalised.
std::vector<double> averaged_pdf(double u, double v, const FitEnsemble& ensemble, std::span<const double> w_grid);
double averaged_mean(double u, double v, const FitEnsemble& ensemble);

/// Posterior mean on the midpoints ((i + 0.5) / m, (j + 0.5) / m). Upper
/// triangle computed, lower mirrored.
GraphonSpec grid_estimate(const VariationalPosterior& posterior, std::size_t m, unsigned threads = 1);
GraphonSpec grid_estimate(const FitEnsemble& ensemble, std::size_t m, unsigned threads = 1);

} // namespace wgraph

#endif
