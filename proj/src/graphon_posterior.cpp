#include "wgraph/graphon_posterior.hpp"
#include "wgraph/parallel.hpp"
#include "wgraph/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace wgraph {

namespace {

constexpr double kQuadratureTarget = 1e-8;
constexpr double kNegativeTolerance = 1e-10;
constexpr double kNormalisationTolerance = 1e-4;
constexpr double kNegligibleWeight = 1e-12;
// Fréchet bounds narrower than this settle a joint probability without quadrature.
constexpr double kBoundsGap = 1e-13;

void check_a3(const std::array<double, 3>& a3)
{
    for (double a : a3)
        if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("Dirichlet parameters must be positive");
}

template <class F>
double integrate(F f, double lo, double hi, double& error)
{
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    const double r = gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-10, &err);
    error += err;
    return r;
}

/// Double-exponential rule for pieces touching an algebraic endpoint
/// singularity, where Gauss-Kronrod subdivides without converging.
template <class F>
double integrate_endpoint(F f, double lo, double hi, double& error)
{
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    double err = 0.0;
    const double r = rule.integrate(f, lo, hi, 1e-10, &err);
    error += err;
    return r;
}

/// int_0^end beta_pdf(t; a1, b) h(t) dt for end < 1. Breakpoints at
/// mean +- {1, 2, 4, 8} sd; the first piece (t^(a1-1) at the origin) and the
/// last piece (h may have a power singularity at end) use tanh-sinh.
template <class H>
double beta_weighted_integral(double a1, double b, double end, H h, double& error)
{
    const double total = a1 + b;
    const double mean = a1 / total;
    const double sd = std::sqrt(a1 * b / (total * total * (total + 1.0)));
    const double min_width = 1e-9 * end; // slivers give unreliable error estimates
    std::vector<double> cuts{0.0};
    for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
        const double c = mean + k * sd;
        if (c > cuts.back() + min_width && c < end - min_width) cuts.push_back(c);
    }
    cuts.push_back(end);
    auto g = [&](double t) { return special::beta_pdf(t, a1, b) * h(t); };
    const std::size_t pieces = cuts.size() - 1;
    double out = 0.0;
    for (std::size_t i = 0; i < pieces; ++i) {
        if (i == 0 || i + 1 == pieces)
            out += integrate_endpoint(g, cuts[i], cuts[i + 1], error);
        else
            out += integrate(g, cuts[i], cuts[i + 1], error);
    }
    return out;
}

double beta_mean(double eta, double zeta) { return eta / (eta + zeta); }

double beta_second_moment(double eta, double zeta)
{
    const double t = eta + zeta;
    return eta * (eta + 1.0) / (t * (t + 1.0));
}

/// Model indices and renormalised weights that take part in averaging.
std::vector<std::pair<int, double>> active_models(const FitEnsemble& ens)
{
    std::vector<std::pair<int, double>> out;
    double total = 0.0;
    for (int Q = 1; Q <= ens.q_max(); ++Q) {
        const double w = ens.weights[Q - 1];
        if (w >= kNegligibleWeight && ens.fits[Q - 1]) {
            out.emplace_back(Q, w);
            total += w;
        }
    }
    for (auto& [q, w] : out) w /= total;
    return out;
}

} // namespace

DirichletParams::DirichletParams(std::vector<double> a) : a_(std::move(a)), s_(a_.size() + 1, 0.0)
{
    if (a_.empty()) throw std::invalid_argument("DirichletParams: empty parameter vector");
    for (std::size_t q = 0; q < a_.size(); ++q) {
        if (!(a_[q] > 0.0) || !std::isfinite(a_[q])) throw std::invalid_argument("DirichletParams: parameters must be positive");
        s_[q + 1] = s_[q] + a_[q];
    }
}

double dirichlet_cdf_uni(double x, const std::array<double, 3>& a3)
{
    check_a3(a3);
    return special::beta_cdf(x, a3[0], a3[1] + a3[2]);
}

double dirichlet_cdf_biv(double x, double y, const std::array<double, 3>& a3)
{
    check_a3(a3);
    const double xe = std::min(x, 1.0);
    if (xe <= 0.0 || y <= 0.0) return 0.0;
    if (y >= 1.0) return dirichlet_cdf_uni(xe, a3);

    const double a1 = a3[0], b = a3[1] + a3[2];
    const double split = 1.0 - y; // beyond it p3 < y holds surely
    double error = 0.0;
    const double head = beta_weighted_integral(
        a1, b, std::min(xe, split), [&](double t) { return special::beta_cdf(y / (1.0 - t), a3[2], a3[1]); }, error);
    const double tail = xe > split ? special::beta_cdf(xe, a1, b) - special::beta_cdf(split, a1, b) : 0.0;
    if (!(error <= kQuadratureTarget)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "dirichlet_cdf_biv: quadrature did not converge at x=" << x << ", y=" << y << ", a=(" << a3[0] << ", "
            << a3[1] << ", " << a3[2] << ") (achieved " << error << ")";
        throw QuadratureError(msg.str(), error);
    }
    return std::clamp(head + tail, 0.0, 1.0);
}

double joint_sigma_cdf(int q, int l, double u, double v, const DirichletParams& d)
{
    const int Q = d.size();
    if (q < 0 || l < 0 || q > Q || l > Q) throw std::out_of_range("joint_sigma_cdf: index out of range");
    const double total = d.s(Q);
    auto marginal = [&](int i, double x) {
        if (i == 0) return 1.0;
        if (i == Q) return 0.0;
        return special::beta_cdf(x, d.s(i), total - d.s(i));
    };
    if (q == 0) return marginal(l, v);
    if (l == 0) return marginal(q, u);
    if (q == Q || l == Q) return 0.0;
    if (q == l) return marginal(q, std::min(u, v));
    if (q > l) return joint_sigma_cdf(l, q, v, u, d);

    const double pu = marginal(q, u), pv = marginal(l, v);
    const double lower = std::max(0.0, pu + pv - 1.0), upper = std::min(pu, pv);
    if (upper - lower <= kBoundsGap) return 0.5 * (lower + upper);

    const std::array<double, 3> a3{d.s(q), d.s(l) - d.s(q), total - d.s(l)};
    // P(sigma_q < u) - P(sigma_q < u, 1 - sigma_l < 1 - v)
    return std::max(0.0, dirichlet_cdf_uni(u, a3) - dirichlet_cdf_biv(u, 1.0 - v, a3));
}

CellWeights cell_weights(double u, double v, const VariationalPosterior& post)
{
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) throw std::out_of_range("cell_weights: (u, v) outside [0,1]^2");
    if (u > v) std::swap(u, v);
    const int Q = post.Q;
    CellWeights cw{Q, Matrix::Zero(Q, Q)};
    if (Q == 1) {
        cw.w(0, 0) = 1.0;
        return cw;
    }
    const DirichletParams d(post.a);
    Matrix F = Matrix::Constant(Q + 1, Q + 1, std::nan(""));
    auto cdf = [&](int i, int j) {
        double& f = F(i, j);
        if (std::isnan(f)) f = joint_sigma_cdf(i, j, u, v, d);
        return f;
    };
    for (int q = 1; q <= Q; ++q)
        for (int l = q; l <= Q; ++l) {
            double w = cdf(q - 1, l - 1) - cdf(q, l - 1) - cdf(q - 1, l) + cdf(q, l);
            if (w < -kNegativeTolerance) {
                std::ostringstream msg;
                msg << "cell_weights: negative weight " << w << " for cell (" << q << ", " << l << ")";
                throw std::runtime_error(msg.str());
            }
            cw.w(q - 1, l - 1) = std::max(w, 0.0);
        }
    const double s = cw.sum();
    if (std::abs(s - 1.0) > kNormalisationTolerance) {
        std::ostringstream msg;
        msg << "cell_weights: weights sum to " << s;
        throw std::runtime_error(msg.str());
    }
    return cw;
}

std::vector<double> posterior_pdf(double u, double v, const VariationalPosterior& post, std::span<const double> w_grid)
{
    const auto cw = cell_weights(u, v, post);
    std::vector<double> out(w_grid.size(), 0.0);
    for (int q = 0; q < post.Q; ++q)
        for (int l = q; l < post.Q; ++l) {
            const double weight = cw.w(q, l);
            if (weight == 0.0) continue;
            for (std::size_t k = 0; k < w_grid.size(); ++k)
                out[k] += weight * special::beta_pdf(w_grid[k], post.eta(q, l), post.zeta(q, l));
        }
    return out;
}

std::vector<double> posterior_cdf(double u, double v, const VariationalPosterior& post, std::span<const double> w_grid)
{
    const auto cw = cell_weights(u, v, post);
    std::vector<double> out(w_grid.size(), 0.0);
    for (int q = 0; q < post.Q; ++q)
        for (int l = q; l < post.Q; ++l) {
            const double weight = cw.w(q, l);
            if (weight == 0.0) continue;
            for (std::size_t k = 0; k < w_grid.size(); ++k)
                out[k] += weight * special::beta_cdf(w_grid[k], post.eta(q, l), post.zeta(q, l));
        }
    return out;
}

double posterior_mean(double u, double v, const VariationalPosterior& post)
{
    const auto cw = cell_weights(u, v, post);
    double m = 0.0;
    for (int q = 0; q < post.Q; ++q)
        for (int l = q; l < post.Q; ++l) m += cw.w(q, l) * beta_mean(post.eta(q, l), post.zeta(q, l));
    return std::clamp(m, 0.0, 1.0);
}

double posterior_sd(double u, double v, const VariationalPosterior& post)
{
    const auto cw = cell_weights(u, v, post);
    double m1 = 0.0, m2 = 0.0;
    for (int q = 0; q < post.Q; ++q)
        for (int l = q; l < post.Q; ++l) {
            m1 += cw.w(q, l) * beta_mean(post.eta(q, l), post.zeta(q, l));
            m2 += cw.w(q, l) * beta_second_moment(post.eta(q, l), post.zeta(q, l));
        }
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

std::vector<double> averaged_pdf(double u, double v, const FitEnsemble& ens, std::span<const double> w_grid)
{
    std::vector<double> out(w_grid.size(), 0.0);
    for (const auto& [Q, weight] : active_models(ens)) {
        const auto pdf = posterior_pdf(u, v, ens.fit(Q), w_grid);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += weight * pdf[k];
    }
    return out;
}

double averaged_mean(double u, double v, const FitEnsemble& ens)
{
    double m = 0.0;
    for (const auto& [Q, weight] : active_models(ens)) m += weight * posterior_mean(u, v, ens.fit(Q));
    return m;
}

namespace {

template <class Eval>
GraphonSpec tabulate(std::size_t m, unsigned threads, Eval eval)
{
    if (m < 2) throw std::invalid_argument("grid_estimate: m must be >= 2");
    std::vector<double> values(m * m, 0.0);
    parallel_for(m, threads, [&](std::size_t i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        for (std::size_t j = i; j < m; ++j) {
            const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
            values[i * m + j] = eval(u, v);
        }
    });
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) values[i * m + j] = values[j * m + i];
    return GraphonSpec::grid(m, std::move(values));
}

} // namespace

GraphonSpec grid_estimate(const VariationalPosterior& post, std::size_t m, unsigned threads)
{
    return tabulate(m, threads, [&](double u, double v) { return posterior_mean(u, v, post); });
}

GraphonSpec grid_estimate(const FitEnsemble& ens, std::size_t m, unsigned threads)
{
    return tabulate(m, threads, [&](double u, double v) { return averaged_mean(u, v, ens); });
}

} // namespace wgraph
