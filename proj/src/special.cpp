#include "wgraph/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace wgraph::special {

namespace {

// Double precision throughout; the default promotes to long double.
using Policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

} // namespace

double log_gamma(double x) { return boost::math::lgamma(x, Policy{}); }

double digamma(double x) { return boost::math::digamma(x, Policy{}); }

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

double log_dirichlet_norm(std::span<const double> a)
{
    double total = 0.0;
    double out = 0.0;
    for (double x : a) {
        out += log_gamma(x);
        total += x;
    }
    return out - log_gamma(total);
}

double beta_pdf(double x, double a, double b)
{
    if (x < 0.0 || x > 1.0) return 0.0;
    return boost::math::ibeta_derivative(a, b, x, Policy{});
}

double beta_cdf(double x, double a, double b)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a, b, x, Policy{});
}

double log_sum_exp(std::span<const double> x)
{
    double top = -std::numeric_limits<double>::infinity();
    for (double v : x) top = std::max(top, v);
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double v : x) s += std::exp(v - top);
    return top + std::log(s);
}

} // namespace wgraph::special
