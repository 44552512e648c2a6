#ifndef WGRAPH_SPECIAL_HPP
#define WGRAPH_SPECIAL_HPP

#include <span>

namespace wgraph::special {

double log_gamma(double x);
double digamma(double x);

/// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b).
double log_beta(double a, double b);

/// log of the Dirichlet normaliser sum_q lgamma(a_q) - lgamma(sum_q a_q).
double log_dirichlet_norm(std::span<const double> a);

double beta_pdf(double x, double a, double b);

/// Regularised incomplete beta I_x(a, b); clamps x to [0, 1].
double beta_cdf(double x, double a, double b);

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

/// Neumaier compensated sum.
class CompensatedSum
{
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace wgraph::special

#endif
