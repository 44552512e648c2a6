#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wgraph/motifs.hpp"

using namespace wgraph;

namespace {

const MotifSpec& builtin(const std::string& name)
{
    for (const auto& m : builtin_motifs())
        if (m.name() == name) return m;
    throw std::invalid_argument(name);
}

Graph complete(std::size_t n)
{
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, e);
}

VariationalPosterior make_posterior(std::vector<double> a, Matrix eta, Matrix zeta)
{
    VariationalPosterior p;
    p.Q = static_cast<int>(a.size());
    p.a = Eigen::Map<Vector>(a.data(), p.Q);
    p.eta = std::move(eta);
    p.zeta = std::move(zeta);
    return p;
}

FitConfig config(std::uint64_t seed)
{
    FitConfig c;
    c.seed = seed;
    return c;
}

} // namespace

TEST(Spec, BuiltinMatrices)
{
    using Rows = std::vector<std::vector<int>>;
    EXPECT_EQ(builtin("triangle").rows(), (Rows{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
    EXPECT_EQ(builtin("square").rows(), (Rows{{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}}));
    EXPECT_EQ(builtin("star4").rows(), (Rows{{0, 1, 1, 1}, {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}}));
    EXPECT_EQ(builtin("edge").num_edges(), 1);
    EXPECT_EQ(builtin("clique4").num_edges(), 6);
    EXPECT_EQ(builtin_motifs().size(), 9u);
}

TEST(Spec, ParseAndValidate)
{
    const auto m = MotifSpec::parse("0110,1010,1101,0010", "paw-ish");
    EXPECT_EQ(m.k(), 4);
    EXPECT_EQ(m.num_edges(), 4);
    EXPECT_EQ(m.degree(2), 3);
    EXPECT_EQ(m.row_string(), "0110,1010,1101,0010");
    EXPECT_EQ(motif_from_string("triangle").num_edges(), 3);
    EXPECT_EQ(motif_from_string("011,101,110").num_edges(), 3);
    EXPECT_THROW(MotifSpec::parse("011,000,100"), std::invalid_argument);  // asymmetric
    EXPECT_THROW(MotifSpec::parse("11,11"), std::invalid_argument);        // diagonal
    EXPECT_THROW(MotifSpec::parse("00,00"), std::invalid_argument);        // no edge
    EXPECT_THROW(MotifSpec::parse("0"), std::invalid_argument);            // k = 1
    EXPECT_THROW(MotifSpec::parse("01,10,11"), std::invalid_argument);     // not square
    EXPECT_THROW(motif_from_string("pentagram"), std::invalid_argument);
}

TEST(Empirical, CompleteAndEmpty)
{
    EXPECT_DOUBLE_EQ(empirical_frequency(complete(5), builtin("triangle"), FrequencyMode::exhaustive()).value, 1.0);
    for (const auto& m : builtin_motifs())
        EXPECT_EQ(empirical_frequency(Graph(6, {}), m, FrequencyMode::exhaustive()).value, 0.0) << m.name();
}

TEST(Empirical, MatchesBruteForce)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.3, 1.5), 14, 8);
    for (const auto& m : builtin_motifs())
        EXPECT_NEAR(empirical_frequency(g, m, FrequencyMode::exhaustive()).value, oracle::brute_force_frequency(g, m),
                    1e-15)
            << m.name();
}

TEST(Empirical, ErdosRenyiTriangle)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 1.0), 316, 5);
    const auto p = empirical_frequency(g, builtin("triangle"), FrequencyMode::sampled(400000, 3));
    EXPECT_GT(p.se, 0.0);
    EXPECT_NEAR(p.value, 1e-3, 3 * p.se);
    EXPECT_EQ(p.method, MotifMethod::empirical);
}

TEST(Sbm, Examples)
{
    EXPECT_NEAR(mu_sbm({1.0}, {{0.5}}, builtin("triangle")), 0.125, 1e-15);
    EXPECT_NEAR(mu_sbm({0.5, 0.5}, {{0.8, 0.2}, {0.2, 0.8}}, builtin("edge")), 0.5, 1e-15);
}

TEST(Sbm, MatchesRecursion)
{
    const std::vector<double> alpha{0.2, 0.5, 0.3};
    const std::vector<std::vector<double>> pi{{0.9, 0.1, 0.4}, {0.1, 0.3, 0.2}, {0.4, 0.2, 0.6}};
    for (const auto& m : builtin_motifs())
        EXPECT_NEAR(mu_sbm(alpha, pi, m), oracle::sbm_motif_probability(alpha, pi, m), 1e-15) << m.name();
}

TEST(Sbm, LabelingGuard)
{
    std::vector<double> alpha(40, 1.0 / 40);
    std::vector<std::vector<double>> pi(40, std::vector<double>(40, 0.1));
    EXPECT_THROW(mu_sbm(alpha, pi, builtin("square")), std::invalid_argument); // 40^4 > 1e6
    EXPECT_NO_THROW(mu_sbm(alpha, pi, builtin("triangle")));
}

TEST(ProductForm, ClosedForm)
{
    EXPECT_NEAR(mu_product_form(0.1, 1.0, builtin("triangle")), 1e-3, 1e-17);
    EXPECT_NEAR(mu_product_form(0.1, 2.0, builtin("edge")), 0.1, 1e-16);
    const auto g = [](double u) { return std::sqrt(0.05) * 3.0 * u * u; };
    for (const auto& m : builtin_motifs())
        EXPECT_NEAR(mu_product_form(g, m), mu_product_form(0.05, 3.0, m), 1e-12 * mu_product_form(0.05, 3.0, m))
            << m.name();
}

TEST(Numeric, AgreesWithExactForms)
{
    const auto sbm = GraphonSpec::blockwise({0.4, 0.6}, {{0.7, 0.2}, {0.2, 0.4}});
    const auto pf = GraphonSpec::product_form(0.1, 2.0);
    for (const auto& name : {"triangle", "square", "star4"}) {
        const auto& m = builtin(name);
        const auto a = mu_numeric(sbm, m, 200000, 1);
        EXPECT_NEAR(a.value, mu_sbm({0.4, 0.6}, {{0.7, 0.2}, {0.2, 0.4}}, m), 3 * a.se) << name;
        const auto b = mu_numeric(pf, m, 200000, 2);
        EXPECT_NEAR(b.value, mu_product_form(0.1, 2.0, m), 3 * b.se) << name;
    }
    const auto c = mu_numeric(GraphonSpec::constant(0.3), builtin("diamond"), 1000, 3);
    EXPECT_NEAR(c.value, std::pow(0.3, 5), 1e-15);
}

TEST(PosteriorMean, OneGroupEdge)
{
    const auto p = make_posterior({7.0}, Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0));
    EXPECT_NEAR(mu_posterior_mean(p, builtin("edge")), 0.4, 1e-10);
    // Triangle: E[pi^3] = 2 * 3 * 4 / (5 * 6 * 7).
    EXPECT_NEAR(mu_posterior_mean(p, builtin("triangle")), 24.0 / 210.0, 1e-12);
}

TEST(PosteriorMean, MatchesSamplingOracle)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 3.0), 100, 21);
    const auto post = fit(g, 3, SbmPrior::uniform(3), config(21));
    for (const auto& m : builtin_motifs()) {
        const auto est = oracle::posterior_motif_mc(post, m, 10000, 4);
        const double mu = mu_posterior_mean(post, m);
        EXPECT_NEAR(mu, est.mean, 0.02 * mu) << m.name();
    }
}

TEST(PosteriorMean, SmallPosteriorExact)
{
    // Q = 2 edge motif by hand: sum_ql E[a_q a_l] E[pi_ql].
    Matrix eta(2, 2), zeta(2, 2);
    eta << 2, 1, 1, 3;
    zeta << 1, 4, 4, 2;
    const auto p = make_posterior({1.0, 2.0}, eta, zeta);
    const double s = 3.0;
    const double e11 = 1.0 * 2.0 / (s * (s + 1)), e22 = 2.0 * 3.0 / (s * (s + 1)), e12 = 1.0 * 2.0 / (s * (s + 1));
    const double expected = e11 * 2.0 / 3.0 + e22 * 3.0 / 5.0 + 2 * e12 * 1.0 / 5.0;
    EXPECT_NEAR(mu_posterior_mean(p, builtin("edge")), expected, 1e-14);
}

TEST(Invariance, GroupRelabeling)
{
    const std::vector<double> alpha{0.2, 0.5, 0.3};
    const std::vector<std::vector<double>> pi{{0.9, 0.1, 0.4}, {0.1, 0.3, 0.2}, {0.4, 0.2, 0.6}};
    const std::vector<int> perm{2, 0, 1};
    std::vector<double> alpha2(3);
    std::vector<std::vector<double>> pi2(3, std::vector<double>(3));
    for (int q = 0; q < 3; ++q) {
        alpha2[perm[q]] = alpha[q];
        for (int l = 0; l < 3; ++l) pi2[perm[q]][perm[l]] = pi[q][l];
    }
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 3.0), 80, 2);
    const auto post = fit(g, 3, SbmPrior::uniform(3), config(2));
    const auto post2 = permute_groups(post, perm);
    for (const auto& m : builtin_motifs()) {
        const double a = mu_sbm(alpha, pi, m);
        EXPECT_NEAR(mu_sbm(alpha2, pi2, m), a, 1e-10 * a) << m.name();
        const double b = mu_posterior_mean(post, m);
        EXPECT_NEAR(mu_posterior_mean(post2, m), b, 1e-10 * b) << m.name();
    }
}

TEST(Invariance, VertexRelabeling)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.3, 1.5), 25, 3);
    const auto post = fit(g, 2, SbmPrior::uniform(2), config(3));
    const std::vector<double> alpha{0.3, 0.7};
    const std::vector<std::vector<double>> pi{{0.6, 0.2}, {0.2, 0.4}};
    for (const auto& m : builtin_motifs()) {
        std::vector<int> perm(m.k());
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        const auto r = m.relabeled(perm);
        EXPECT_NEAR(mu_sbm(alpha, pi, r), mu_sbm(alpha, pi, m), 1e-12) << m.name();
        EXPECT_NEAR(mu_product_form(0.1, 2.0, r), mu_product_form(0.1, 2.0, m), 1e-12);
        EXPECT_NEAR(mu_posterior_mean(post, r), mu_posterior_mean(post, m), 1e-12);
        EXPECT_NEAR(empirical_frequency(g, r, FrequencyMode::exhaustive()).value,
                    empirical_frequency(g, m, FrequencyMode::exhaustive()).value, 1e-12);
    }
}

TEST(Monotonicity, AddingEdgesNeverIncreases)
{
    // path3 -> triangle, path4 -> square -> diamond -> clique4, star4 -> paw -> diamond.
    const std::vector<std::pair<std::string, std::string>> chain{{"path3", "triangle"}, {"path4", "square"},
                                                                 {"square", "diamond"}, {"diamond", "clique4"},
                                                                 {"star4", "paw"},      {"paw", "diamond"}};
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.2, 2.0), 30, 4);
    const auto post = fit(g, 2, SbmPrior::uniform(2), config(4));
    const std::vector<double> alpha{0.3, 0.7};
    const std::vector<std::vector<double>> pi{{0.6, 0.2}, {0.2, 0.4}};
    for (const auto& [lo, hi] : chain) {
        const auto& a = builtin(lo);
        const auto& b = builtin(hi);
        EXPECT_GE(mu_sbm(alpha, pi, a), mu_sbm(alpha, pi, b)) << lo << " " << hi;
        EXPECT_GE(mu_product_form(0.1, 2.0, a), mu_product_form(0.1, 2.0, b));
        EXPECT_GE(mu_posterior_mean(post, a), mu_posterior_mean(post, b));
        EXPECT_GE(empirical_frequency(g, a, FrequencyMode::exhaustive()).value,
                  empirical_frequency(g, b, FrequencyMode::exhaustive()).value);
    }
}

TEST(Ensemble, AveragedAndMap)
{
    const auto [g, lat] = sample_wgraph(GraphonSpec::product_form(0.1, 3.0), 80, 6);
    auto ens = fit_ensemble(g, 3, config(6));
    EXPECT_EQ(mu_map(ens, builtin("triangle")), mu_posterior_mean(ens.map_fit(), builtin("triangle")));
    ens.weights = {1.0, 0.0, 0.0};
    EXPECT_EQ(mu_averaged(ens, builtin("square")), mu_posterior_mean(ens.fit(1), builtin("square")));
    ens.weights = {0.25, 0.75, 0.0};
    EXPECT_NEAR(mu_averaged(ens, builtin("edge")),
                0.25 * mu_posterior_mean(ens.fit(1), builtin("edge")) + 0.75 * mu_posterior_mean(ens.fit(2), builtin("edge")),
                1e-15);
}
