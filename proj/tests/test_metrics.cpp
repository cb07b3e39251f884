#include <gtest/gtest.h>

#include "scoresort/metrics.hpp"
#include "scoresort/ordering.hpp"

using namespace scoresort;

namespace {

Dag graph_of(int d, std::initializer_list<std::pair<int, int>> edges) {
    Dag g;
    g.d = d;
    for (const auto& e : edges) g.edges.insert(e);
    return g;
}

}  // namespace

TEST(FnrPi, SingleEdgeFixtures) {
    const Dag truth = graph_of(2, {{0, 1}});
    const OrderEval fwd = fnr_pi(TopOrder{{0, 1}}, truth);
    EXPECT_DOUBLE_EQ(fwd.fnr_pi, 0.0);
    EXPECT_DOUBLE_EQ(fwd.nu, 1.0);
    const OrderEval bwd = fnr_pi(TopOrder{{1, 0}}, truth);
    EXPECT_DOUBLE_EQ(bwd.fnr_pi, 1.0);
    EXPECT_DOUBLE_EQ(bwd.nu, 0.0);
}

TEST(FnrPi, QuadraticFixtureGraphWithSwappedTail) {
    // Edges {(0,1),(0,2),(1,2)} against order (0,2,1): only (1,2) reversed.
    const Dag truth = graph_of(3, {{0, 1}, {0, 2}, {1, 2}});
    const OrderEval ev = fnr_pi(TopOrder{{0, 2, 1}}, truth);
    EXPECT_EQ(ev.edges_total, 3);
    EXPECT_EQ(ev.edges_reversed, 1);
    EXPECT_NEAR(ev.fnr_pi, 1.0 / 3.0, 1e-15);
}

TEST(FnrPi, EdgelessTruthIsAnError) {
    EXPECT_THROW(fnr_pi(TopOrder{{0, 1}}, graph_of(2, {})), ParameterError);
}

TEST(FnrPi, InvariantUnderConsistentRelabeling) {
    Rng rng = make_rng(3);
    const Dag truth = sample_er(6, EdgesPerNode{1.5}, rng);
    if (truth.edges.empty()) GTEST_SKIP();
    const TopOrder order = random_order(6, rng);
    const OrderEval base = fnr_pi(order, truth);

    std::vector<int> rho(6);
    std::iota(rho.begin(), rho.end(), 0);
    std::shuffle(rho.begin(), rho.end(), rng);
    Dag relabeled;
    relabeled.d = 6;
    for (const auto& [i, j] : truth.edges)
        relabeled.edges.emplace(rho[static_cast<std::size_t>(i)], rho[static_cast<std::size_t>(j)]);
    TopOrder relorder;
    for (int v : order.perm) relorder.perm.push_back(rho[static_cast<std::size_t>(v)]);
    EXPECT_DOUBLE_EQ(fnr_pi(relorder, relabeled).fnr_pi, base.fnr_pi);
}

TEST(FnrPi, MatchesScoreSortabilityDefinition) {
    // nu over the ScoreSort order equals 1 - (reversed / |E|) by definition;
    // cross-check on the analytic fixture.
    const ScmSpec spec = three_node_quadratic_scm();
    Rng rng = make_rng(4);
    const Dataset ds = sample_dataset(spec, 50000, rng);
    OrderingConfig cfg;
    cfg.estimator = OrderingConfig::Estimator::Analytic;
    cfg.analytic_spec = &spec;
    const OrderEval ev = fnr_pi(score_sort(ds, cfg), spec.graph);
    EXPECT_DOUBLE_EQ(ev.nu, 1.0);
}

TEST(Shd, Fixtures) {
    const Dag a = graph_of(3, {{0, 1}, {1, 2}});
    EXPECT_EQ(shd(a, a), 0);
    EXPECT_EQ(shd(graph_of(2, {{1, 0}}), graph_of(2, {{0, 1}})), 1);  // one reversed pair
    // one missing ((1,2)) and one extra ((0,2))
    EXPECT_EQ(shd(graph_of(3, {{0, 1}, {0, 2}}), a), 2);
}

TEST(Shd, SymmetricAndZeroOnEqual) {
    Rng rng = make_rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Dag x = sample_er(7, EdgesPerNode{1.5}, rng);
        const Dag y = sample_er(7, EdgesPerNode{1.5}, rng);
        EXPECT_EQ(shd(x, y), shd(y, x));
        EXPECT_EQ(shd(x, x), 0);
    }
}

TEST(Shd, DimensionMismatchIsAnError) {
    EXPECT_THROW(shd(graph_of(2, {}), graph_of(3, {})), ParameterError);
}

TEST(BivariateIdentifiability, LinearGaussianIsATie) {
    // lhs = rhs = 0 in population; the finite-sample verdict at an exact tie
    // is sign noise, so what must hold is near-zero magnitudes plus a margin
    // within the reported Monte Carlo standard error.
    const Polynomial linear{{{1.0, {1}}}};
    Rng rng = make_rng(6);
    const IdentifiabilityReport rep = bivariate_identifiability(linear, 1.0, 1.0, 1000000, rng);
    EXPECT_NEAR(rep.lhs, 0.0, 1e-12);      // f' is constant
    EXPECT_NEAR(rep.rhs, 0.0, 0.01);       // 1 - Var/Var - 0
    EXPECT_NEAR(rep.c_term, 0.0, 0.01);
    EXPECT_GT(rep.mc_se, 0.0);
    EXPECT_LE(std::abs(rep.lhs - rep.rhs), 4.0 * rep.mc_se);  // flagged near tie
}

TEST(BivariateIdentifiability, QuadraticIsIdentifiable) {
    const Polynomial square{{{1.0, {2}}}};
    Rng rng = make_rng(7);
    const IdentifiabilityReport rep = bivariate_identifiability(square, 1.0, 1.0, 1000000, rng);
    EXPECT_NEAR(rep.lhs, 4.0, 0.1);        // Var[2U] = 4
    EXPECT_NEAR(rep.c_term, 0.0, 0.02);    // odd moments cancel
    EXPECT_NEAR(rep.rhs, 0.0, 0.02);
    EXPECT_TRUE(rep.identifiable);
}

TEST(BivariateIdentifiability, WeakQuadraticStillPositiveMargin) {
    const Polynomial weak{{{0.1, {2}}}};
    Rng rng = make_rng(8);
    const IdentifiabilityReport rep = bivariate_identifiability(weak, 1.0, 1.0, 1000000, rng);
    EXPECT_NEAR(rep.lhs, 0.04, 0.005);
    EXPECT_TRUE(rep.identifiable);  // 0.04 > ~0
}

TEST(BivariateIdentifiability, TooFewDrawsRejected) {
    const Polynomial linear{{{1.0, {1}}}};
    Rng rng = make_rng(9);
    EXPECT_THROW(bivariate_identifiability(linear, 1.0, 1.0, 50, rng), ParameterError);
}

// Strict-inequality cases: the Prop-1 verdict must agree with the sign of
// Var[s_X] - Var[s_Y] computed from the analytic score at n = 1e6.
TEST(BivariateIdentifiability, VerdictAgreesWithAnalyticScoreSign) {
    struct Case {
        Polynomial f;
        double sigma_y;
    };
    const std::vector<Case> cases{
        {Polynomial{{{1.0, {2}}}}, 1.0},    // strong quadratic
        {Polynomial{{{0.1, {2}}}}, 1.0},    // weak quadratic
        {Polynomial{{{1.0, {3}}}}, 1.0},    // cubic
        {Polynomial{{{0.5, {2}}}}, 0.7},
    };
    for (std::size_t c = 0; c < cases.size(); ++c) {
        Rng rng = make_rng(100 + c);
        const IdentifiabilityReport rep =
            bivariate_identifiability(cases[c].f, 1.0, cases[c].sigma_y, 1000000, rng);

        ScmSpec spec;
        spec.graph.d = 2;
        spec.graph.edges = {{0, 1}};
        spec.noise.assign(2, NoiseSpec{1.0, NoiseMode::Gaussian, std::nullopt});
        spec.noise[1].sigma = cases[c].sigma_y;
        spec.mechanisms.emplace(1, cases[c].f);
        Rng drng = make_rng(200 + c);
        const Dataset ds = sample_dataset(spec, 1000000, drng);
        const Vector vars = column_variances(analytic_score(spec, ds));
        if (std::abs(rep.lhs - rep.rhs) < 3.0 * rep.mc_se) continue;  // tie, excluded
        EXPECT_EQ(rep.identifiable, vars[0] > vars[1]) << "case " << c;
    }
}
