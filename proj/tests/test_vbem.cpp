#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wgraph/graph.hpp"
#include "wgraph/vbem.hpp"

using namespace wgraph;

namespace {

FitConfig config(std::uint64_t seed, double tol = 1e-6)
{
    FitConfig c;
    c.seed = seed;
    c.tol = tol;
    return c;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

} // namespace

TEST(OneGroup, ClosedFormUpdates)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 1.0), 120, 2);
    const auto post = fit(g, 1, SbmPrior::uniform(1), config(1));
    const double pairs = static_cast<double>(g.num_pairs());
    const double e = static_cast<double>(g.num_edges());
    EXPECT_DOUBLE_EQ(post.a(0), 1.0 + 120.0);
    EXPECT_NEAR(post.eta(0, 0), 1.0 + e, 1e-9);
    EXPECT_NEAR(post.zeta(0, 0), 1.0 + pairs - e, 1e-9);
    for (Eigen::Index i = 0; i < post.tau.rows(); ++i) EXPECT_DOUBLE_EQ(post.tau(i, 0), 1.0);
}

TEST(OneGroup, LowerBoundIsLogEvidence)
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.05 + 0.05 * s, 1.0), 40 + 30 * s, s);
        SbmPrior prior = SbmPrior::uniform(1);
        prior.eta0(0, 0) = 0.5 + s;
        prior.zeta0(0, 0) = 2.0;
        const auto post = fit(g, 1, prior, config(s));
        const double ref = oracle::one_group_log_evidence(g.num_edges(), g.num_pairs(), prior.eta0(0, 0), prior.zeta0(0, 0));
        EXPECT_NEAR(post.elbo, ref, 1e-9 * std::abs(ref));
    }
}

TEST(Fit, TwoCliquesSeparated)
{
    const auto g = oracle::two_cliques(20, 30);
    const auto post = fit(g, 2, SbmPrior::uniform(2), config(3));
    for (Eigen::Index i = 0; i < post.tau.rows(); ++i) EXPECT_GT(post.tau.row(i).maxCoeff(), 0.99);
    // The two cliques land in different groups.
    Eigen::Index g0, g1;
    post.tau.row(0).maxCoeff(&g0);
    post.tau.row(49).maxCoeff(&g1);
    EXPECT_NE(g0, g1);
    for (int i = 1; i < 20; ++i) EXPECT_GT(post.tau(i, g0), 0.99);
}

TEST(Fit, LowerBoundNonDecreasing)
{
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 2.0), 80, 40 + s);
        const int Q = 2 + static_cast<int>(s % 4);
        const auto post = fit(g, Q, SbmPrior::uniform(Q), config(s, 1e-10));
        ASSERT_GE(post.elbo_trace.size(), 2u);
        for (std::size_t t = 1; t < post.elbo_trace.size(); ++t)
            EXPECT_GE(post.elbo_trace[t], post.elbo_trace[t - 1] - 1e-8 * std::abs(post.elbo_trace[t - 1]));
    }
}

TEST(Fit, ClosedFormMatchesFunctional)
{
    const auto [g, lat] = sample_sbm({0.3, 0.7}, {{0.5, 0.1}, {0.1, 0.2}}, 90, 8);
    const auto prior = SbmPrior::uniform(3);
    const auto post = fit(g, 3, prior, config(8));
    EXPECT_NEAR(elbo(g, post, prior), elbo_functional(g, post, prior), 1e-8 * std::abs(post.elbo));
    EXPECT_NEAR(post.elbo, elbo(g, post, prior), 1e-9 * std::abs(post.elbo));

    // Functional for arbitrary labels equals closed form after the update.
    LabelMatrix tau = LabelMatrix::Constant(90, 3, 1.0 / 3.0);
    tau.col(0).head(30).array() += 0.2;
    tau.col(1).head(30).array() -= 0.2;
    const auto p2 = posterior_from_labels(g, tau, prior);
    EXPECT_NEAR(elbo(g, p2, prior), elbo_functional(g, p2, prior), 1e-8 * std::abs(p2.elbo));
}

TEST(Fit, FunctionalIsMaximisedByUpdate)
{
    // Perturbing (a, eta, zeta) away from the update of tau lowers J.
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 2.0), 60, 5);
    const auto prior = SbmPrior::uniform(2);
    const auto post = fit(g, 2, prior, config(5));
    const double j0 = elbo_functional(g, post, prior);
    auto p = post;
    p.eta(0, 1) = p.eta(1, 0) = p.eta(0, 1) * 1.1;
    EXPECT_LT(elbo_functional(g, p, prior), j0);
    p = post;
    p.a(0) += 1.0;
    EXPECT_LT(elbo_functional(g, p, prior), j0);
}

TEST(LowerBound, EmptyGraphEntropy)
{
    const Graph g(10, {});
    const int Q = 2;
    const auto prior = SbmPrior::uniform(Q);
    const auto post = posterior_from_labels(g, LabelMatrix::Constant(10, Q, 0.5), prior);
    // Hand-computed update: a = 1 + 5, eta = 1, zeta = 1 + 11.25 within, 1 + 22.5 across.
    EXPECT_NEAR(post.a(0), 6.0, 1e-12);
    EXPECT_NEAR(post.zeta(0, 0), 12.25, 1e-12);
    EXPECT_NEAR(post.zeta(0, 1), 23.5, 1e-12);
    const double non_entropy = 2 * log_beta(1.0, 12.25) + log_beta(1.0, 23.5) + 2 * std::lgamma(6.0) - std::lgamma(12.0) -
                               (2 * std::lgamma(1.0) - std::lgamma(2.0));
    ASSERT_TRUE(std::isfinite(post.elbo));
    EXPECT_NEAR(post.elbo - non_entropy, 10 * std::log(2.0), 1e-9);
}

TEST(Sorting, OneGroupUnchanged)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::constant(0.2), 30, 1);
    const auto post = fit(g, 1, SbmPrior::uniform(1), config(1));
    const auto sorted = sort_identifiable(post);
    EXPECT_EQ(sorted.a, post.a);
    EXPECT_EQ(sorted.eta, post.eta);
}

TEST(Sorting, SwapsDecreasingDegrees)
{
    VariationalPosterior p;
    p.Q = 2;
    p.a = Vector::Constant(2, 1.0);
    p.eta.resize(2, 2);
    p.zeta.resize(2, 2);
    p.eta << 7, 1, 1, 1;
    p.zeta << 3, 9, 9, 9;
    p.tau = LabelMatrix::Zero(3, 2);
    p.tau.col(0).setOnes();
    auto d = block_degrees(p);
    EXPECT_NEAR(d[0], 0.4, 1e-12);
    EXPECT_NEAR(d[1], 0.1, 1e-12);

    const auto s = sort_identifiable(p);
    d = block_degrees(s);
    EXPECT_NEAR(d[0], 0.1, 1e-12);
    EXPECT_NEAR(d[1], 0.4, 1e-12);
    EXPECT_EQ(s.eta(0, 0), 1.0);
    EXPECT_EQ(s.eta(1, 1), 7.0);
    EXPECT_EQ(s.tau(0, 1), 1.0);

    const auto twice = sort_identifiable(s);
    EXPECT_EQ(twice.eta, s.eta);
    EXPECT_EQ(twice.a, s.a);
    EXPECT_EQ(twice.tau, s.tau);
}

TEST(Sorting, PermutationInvariant)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 3.0), 100, 12);
    const auto prior = SbmPrior::uniform(4);
    const auto post = fit(g, 4, prior, config(12));
    const auto d = block_degrees(post);
    EXPECT_TRUE(std::is_sorted(d.begin(), d.end()));
    const auto shuffled = permute_groups(post, {2, 0, 3, 1});
    const auto back = sort_identifiable(shuffled);
    EXPECT_TRUE(back.a.isApprox(post.a, 1e-14));
    EXPECT_TRUE(back.eta.isApprox(post.eta, 1e-14));
    EXPECT_TRUE(back.zeta.isApprox(post.zeta, 1e-14));
}

TEST(Invariance, GroupRelabelingKeepsLowerBound)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 2.0), 70, 6);
    const auto prior = SbmPrior::uniform(3);
    const auto post = fit(g, 3, prior, config(6));
    const auto perm = permute_groups(post, {1, 2, 0});
    EXPECT_NEAR(elbo(g, perm, prior), post.elbo, 1e-10 * std::abs(post.elbo));
    EXPECT_NEAR(elbo_functional(g, perm, prior), post.elbo, 1e-8 * std::abs(post.elbo));
}

TEST(Invariance, NodeRelabeling)
{
    const auto [g, lat] = sample_sbm({0.4, 0.6}, {{0.7, 0.05}, {0.05, 0.5}}, 60, 17);
    std::vector<NodeId> perm(60);
    std::iota(perm.begin(), perm.end(), 0u);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[3], perm[40]);
    const auto h = g.permuted(perm);
    const auto prior = SbmPrior::uniform(2);
    const auto a = fit(g, 2, prior, config(1, 1e-12));
    const auto b = fit(h, 2, prior, config(2, 1e-12));
    EXPECT_NEAR(a.elbo, b.elbo, 1e-8 * std::abs(a.elbo));
    EXPECT_TRUE(a.eta.isApprox(b.eta, 1e-6));
    for (NodeId i = 0; i < 60; ++i) EXPECT_NEAR(a.tau(i, 0), b.tau(perm[i], 0), 1e-6);
}

TEST(Weights, Softmax)
{
    const auto w = model_weights({-100.0, -101.0});
    EXPECT_NEAR(w[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
    EXPECT_NEAR(w[0], 0.731, 5e-4);
    EXPECT_NEAR(w[1], 0.269, 5e-4);
    const auto big = model_weights({-1e6, -1e6 - 2.0, -std::numeric_limits<double>::infinity()});
    EXPECT_NEAR(big[0] + big[1], 1.0, 1e-15);
    EXPECT_EQ(big[2], 0.0);
}

TEST(Ensemble, SingleModel)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::constant(0.2), 40, 1);
    const auto ens = fit_ensemble(g, 1, config(1));
    ASSERT_EQ(ens.weights.size(), 1u);
    EXPECT_EQ(ens.weights[0], 1.0);
    EXPECT_EQ(ens.map_q, 1);
}

TEST(Ensemble, ErdosRenyiPrefersOneGroup)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 1.0), 316, 77);
    const auto ens = fit_ensemble(g, 5, config(77));
    EXPECT_EQ(ens.map_q, 1);
    EXPECT_GT(ens.weights[0], 0.5);
    double total = 0.0;
    for (double w : ens.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Ensemble, MapIsArgmaxAndThreadIndependent)
{
    const auto [g, lat] = sample_sbm({0.5, 0.5}, {{0.6, 0.1}, {0.1, 0.6}}, 60, 4);
    const auto a = fit_ensemble(g, 4, config(9), 1);
    const auto b = fit_ensemble(g, 4, config(9), 3);
    EXPECT_EQ(a.map_q, 2);
    const auto e = a.elbos();
    EXPECT_EQ(std::max_element(e.begin(), e.end()) - e.begin() + 1, a.map_q);
    EXPECT_EQ(a.elbos(), b.elbos());
    EXPECT_EQ(a.weights, b.weights);
}

TEST(Ensemble, Invariants)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 2.0), 80, 31);
    const auto ens = fit_ensemble(g, 4, config(31));
    for (int Q = 1; Q <= 4; ++Q) {
        const auto& p = ens.fit(Q);
        EXPECT_EQ(p.tau.rows(), 80);
        for (Eigen::Index i = 0; i < p.tau.rows(); ++i) EXPECT_NEAR(p.tau.row(i).sum(), 1.0, 1e-12);
        EXPECT_NEAR(p.a.sum(), Q + 80.0, 1e-9);
        EXPECT_NEAR((p.eta + p.zeta).triangularView<Eigen::Upper>().toDenseMatrix().sum(),
                    2.0 * Q * (Q + 1) / 2.0 + static_cast<double>(g.num_pairs()), 1e-6);
        EXPECT_TRUE(p.eta.isApprox(p.eta.transpose()));
        EXPECT_TRUE((p.eta.array() > 0).all() && (p.zeta.array() > 0).all());
    }
}

TEST(Errors, BadInput)
{
    EXPECT_THROW(fit(Graph(), 2, SbmPrior::uniform(2), config(1)), std::invalid_argument);
    const Graph g(5, {{0, 1}});
    EXPECT_THROW(fit(g, 2, SbmPrior::uniform(3), config(1)), std::invalid_argument);
    EXPECT_THROW(fit(g, 0, SbmPrior::uniform(1), config(1)), std::invalid_argument);
    SbmPrior bad = SbmPrior::uniform(2);
    bad.eta0(0, 1) = -1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
