#include <gtest/gtest.h>

#include "scoresort/scm.hpp"
#include "testutil.hpp"

using namespace scoresort;

TEST(SampleNoise, GaussianMoments) {
    NoiseSpec spec{1.0, NoiseMode::Gaussian, std::nullopt};
    Rng rng = make_rng(1);
    const Vector u = sample_noise(100000, spec, rng);
    EXPECT_NEAR(sample_variance(u), 1.0, 0.05);
    EXPECT_NEAR(u.mean(), 0.0, 0.02);
}

TEST(SampleNoise, TransformedIsDeterministic) {
    Rng trng = make_rng(2);
    NoiseSpec spec{0.8, NoiseMode::MlpTransformed, sample_noise_transform(trng)};
    Rng a = make_rng(3), b = make_rng(3);
    const Vector ua = sample_noise(500, spec, a);
    const Vector ub = sample_noise(500, spec, b);
    EXPECT_EQ((ua - ub).cwiseAbs().maxCoeff(), 0.0);
}

// The sigmoid-MLP transform bends the latent Gaussian into a visibly
// non-Gaussian shape for typical weight draws.
TEST(SampleNoise, TransformedNoiseIsNonGaussian) {
    Rng trng = make_rng(2001);
    NoiseSpec spec{1.0, NoiseMode::MlpTransformed, sample_noise_transform(trng)};
    Rng rng = make_rng(5);
    const Vector u = sample_noise(100000, spec, rng);
    std::vector<double> tv(u.data(), u.data() + u.size());
    const double ks_t = testutil::ks_vs_fitted_gaussian(std::move(tv));

    NoiseSpec gspec{1.0, NoiseMode::Gaussian, std::nullopt};
    const Vector g = sample_noise(100000, gspec, rng);
    std::vector<double> gv(g.data(), g.data() + g.size());
    const double ks_g = testutil::ks_vs_fitted_gaussian(std::move(gv));

    EXPECT_GT(ks_t, 2.0 * ks_g);
}

TEST(SampleNoise, MissingTransformIsAnError) {
    NoiseSpec spec{1.0, NoiseMode::MlpTransformed, std::nullopt};
    Rng rng = make_rng(0);
    EXPECT_THROW(sample_noise(10, spec, rng), ParameterError);
}

TEST(GpMechanism, SinglePointIsStandardNormalDraw) {
    Matrix parent(1, 1);
    parent << 0.2;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed);
        const Vector f = gp_mechanism_values(parent, rng);
        ASSERT_EQ(f.size(), 1);
        EXPECT_LT(std::abs(f[0]), 5.0);  // K(x,x) = 1 + jitter
    }
}

TEST(GpMechanism, IdenticalRowsNearlyTied) {
    Matrix parent(2, 1);
    parent << 0.3, 0.3;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng = make_rng(seed);
        const Vector f = gp_mechanism_values(parent, rng);
        EXPECT_LT(std::abs(f[0] - f[1]), 0.05);  // rank-1 covariance up to jitter
    }
}

// The marginal variance of the draw is K(x,x) = 1, but values are correlated
// across rows, so the sample variance concentrates near 1 - E[kappa] ~ 0.42
// for standard-normal inputs at unit bandwidth.
TEST(GpMechanism, SampleVarianceAcrossSeeds) {
    std::vector<double> vars;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(1000 + seed);
        Matrix parent(500, 1);
        for (int i = 0; i < 500; ++i) parent(i, 0) = gauss(rng);
        vars.push_back(sample_variance(gp_mechanism_values(parent, rng)));
    }
    const double med = median_of(vars);
    EXPECT_GT(med, 0.15);
    EXPECT_LT(med, 1.0);
    double mean = 0.0;
    for (double v : vars) mean += v;
    EXPECT_NEAR(mean / static_cast<double>(vars.size()), 0.42, 0.12);
}

TEST(Mechanisms, PolynomialEvalAndGrad) {
    const Polynomial square{{{1.0, {2}}}};
    Matrix x(1, 1);
    x << 3.0;
    EXPECT_DOUBLE_EQ(eval_mechanism(square, x)[0], 9.0);
    EXPECT_DOUBLE_EQ(eval_mechanism_grad(square, x, 0)[0], 6.0);

    // node 2 of the quadratic fixture at (x0, x1) = (1, 2)
    const Polynomial sum_of_squares{{{1.0, {2, 0}}, {1.0, {0, 2}}}};
    Matrix xy(1, 2);
    xy << 1.0, 2.0;
    EXPECT_DOUBLE_EQ(eval_mechanism(sum_of_squares, xy)[0], 5.0);
    EXPECT_DOUBLE_EQ(eval_mechanism_grad(sum_of_squares, xy, 1)[0], 4.0);
}

TEST(Mechanisms, MlpGradMatchesFiniteDifference) {
    Rng rng = make_rng(21);
    const MlpMechanism mlp = sample_mlp_mechanism(3, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    int checked = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Matrix p(1, 3);
        for (int j = 0; j < 3; ++j) p(0, j) = gauss(rng);
        for (int wrt = 0; wrt < 3; ++wrt) {
            // skip points near a leaky-ReLU kink, where the derivative jumps
            const Vector pre = mlp.w1 * p.row(0).transpose() + mlp.b1;
            if (pre.cwiseAbs().minCoeff() < 1e-3) continue;
            auto f = [&](double v) {
                Matrix q = p;
                q(0, wrt) = v;
                return eval_mechanism(mlp, q)[0];
            };
            const double fd = testutil::central_diff(f, p(0, wrt));
            worst = std::max(worst, std::abs(fd - eval_mechanism_grad(mlp, p, wrt)[0]));
            ++checked;
        }
    }
    ASSERT_GT(checked, 100);
    EXPECT_LT(worst, 1e-6);
}

TEST(Mechanisms, GpDrawHasNoReusableForm) {
    Matrix x(2, 1);
    x << 0.0, 1.0;
    EXPECT_THROW(eval_mechanism(GpDraw{}, x), UnsupportedModelError);
    EXPECT_THROW(eval_mechanism_grad(GpDraw{}, x, 0), UnsupportedModelError);
}

TEST(SampleDataset, QuadraticFixtureMoments) {
    // Var(X0) = 1, Var(X1) = Var(U0^2 + U1) = 2 + 1 = 3.
    const ScmSpec spec = three_node_quadratic_scm();
    Rng rng = make_rng(31);
    const Dataset ds = sample_dataset(spec, 100000, rng);
    EXPECT_NEAR(sample_variance(ds.values.col(0)), 1.0, 0.03);
    EXPECT_NEAR(sample_variance(ds.values.col(1)), 3.0, 0.15);
}

TEST(SampleDataset, EmptyGraphGivesUncorrelatedColumns) {
    Dag g;
    g.d = 3;
    const ScmSpec spec = make_random_scm(g, MechanismKind::Gp, NoiseMode::Gaussian, 77);
    Rng rng = make_rng(7);
    const Dataset ds = sample_dataset(spec, 10000, rng);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            EXPECT_LT(std::abs(testutil::pearson(ds.values.col(a), ds.values.col(b))), 0.05);
}

TEST(SampleDataset, DeterministicInSeed) {
    Rng grng = make_rng(4);
    const Dag g = sample_er(6, EdgesPerNode{1.5}, grng);
    const ScmSpec spec = make_random_scm(g, MechanismKind::Mlp, NoiseMode::MlpTransformed, 99);
    Rng a = make_rng(5), b = make_rng(5);
    const Dataset da = sample_dataset(spec, 400, a);
    const Dataset db = sample_dataset(spec, 400, b);
    EXPECT_EQ((da.values - db.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleDataset, FiniteForRandomSpecs) {
    Rng rng = make_rng(55);
    for (int rep = 0; rep < 60; ++rep) {
        std::uniform_int_distribution<int> dd(2, 8);
        const int d = dd(rng);
        const Dag g = sample_er(d, EdgesPerNode{1.0 + rep % 2}, rng);
        const auto kind = rep % 2 == 0 ? MechanismKind::Gp : MechanismKind::Mlp;
        const auto noise = rep % 3 == 0 ? NoiseMode::Gaussian : NoiseMode::MlpTransformed;
        const ScmSpec spec = make_random_scm(g, kind, noise, 7000 + static_cast<std::uint64_t>(rep), 200);
        Rng drng = substream(spec.seed, "data");
        const Dataset ds = sample_dataset(spec, 150, drng);
        EXPECT_TRUE(ds.values.allFinite());
    }
}

TEST(AnalyticScore, QuadraticFixtureVariances) {
    // Var[s] = (9, 17, 1): s0 = U0(2U1 + 2U2 - 1), s1 = -U1 + 2U1U2 + 2U0^2 U2
    // (variance 1 + 4 + 4 E[U0^4] = 17), s2 = -U2. After removing X2 the
    // remaining model gives (5, 1).
    const ScmSpec spec = three_node_quadratic_scm();
    Rng rng = make_rng(77);
    const Dataset ds = sample_dataset(spec, 1000000, rng);
    const Vector vars = column_variances(analytic_score(spec, ds));
    EXPECT_NEAR(vars[0] / 9.0, 1.0, 0.03);
    EXPECT_NEAR(vars[1] / 17.0, 1.0, 0.03);
    EXPECT_NEAR(vars[2] / 1.0, 1.0, 0.03);

    const Vector sub = column_variances(analytic_score_subset(spec, ds, {0, 1}));
    EXPECT_NEAR(sub[0] / 5.0, 1.0, 0.03);
    EXPECT_NEAR(sub[1] / 1.0, 1.0, 0.03);
}

TEST(AnalyticScore, IsolatedGaussianNodeScoreIsMinusX) {
    Dag g;
    g.d = 1;
    ScmSpec spec;
    spec.graph = g;
    spec.noise.push_back(NoiseSpec{1.0, NoiseMode::Gaussian, std::nullopt});
    Rng rng = make_rng(8);
    const Dataset ds = sample_dataset(spec, 100, rng);
    const Matrix s = analytic_score(spec, ds);
    EXPECT_EQ((s + ds.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AnalyticScore, LeafColumnIsScaledResidual) {
    const ScmSpec spec = three_node_quadratic_scm();
    Rng rng = make_rng(9);
    const Dataset ds = sample_dataset(spec, 500, rng);
    const Matrix s = analytic_score(spec, ds);
    const Vector f2 = ds.values.col(0).array().square() + ds.values.col(1).array().square();
    const Vector expected = -(ds.values.col(2) - f2);
    EXPECT_LT((s.col(2) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

// Bivariate linear Gaussian: the joint has covariance [[1,1],[1,2]], so the
// score-component variances are the precision diagonal (2, 1) -- not a tie.
TEST(AnalyticScore, LinearBivariateVariances) {
    ScmSpec spec;
    spec.graph.d = 2;
    spec.graph.edges = {{0, 1}};
    spec.noise.assign(2, NoiseSpec{1.0, NoiseMode::Gaussian, std::nullopt});
    spec.mechanisms.emplace(1, Polynomial{{{1.0, {1}}}});
    Rng rng = make_rng(10);
    const Dataset ds = sample_dataset(spec, 1000000, rng);
    const Vector vars = column_variances(analytic_score(spec, ds));
    EXPECT_NEAR(vars[0], 2.0, 0.02);
    EXPECT_NEAR(vars[1], 1.0, 0.01);
}

TEST(AnalyticScore, RejectsUnsupportedModels) {
    Rng grng = make_rng(11);
    const Dag g = sample_er(4, EdgesPerNode{1.0}, grng);
    const ScmSpec gp_spec = make_random_scm(g, MechanismKind::Gp, NoiseMode::Gaussian, 1);
    Rng rng = make_rng(12);
    const Dataset ds = sample_dataset(gp_spec, 50, rng);
    if (!gp_spec.mechanisms.empty()) EXPECT_THROW(analytic_score(gp_spec, ds), UnsupportedModelError);

    const ScmSpec noisy = make_random_scm(g, MechanismKind::Mlp, NoiseMode::MlpTransformed, 2);
    Rng rng2 = substream(2, "data");
    const Dataset ds2 = sample_dataset(noisy, 50, rng2);
    EXPECT_THROW(analytic_score(noisy, ds2), UnsupportedModelError);
}

TEST(MakeRandomScm, MlpNormFixedOnce) {
    Rng grng = make_rng(13);
    const Dag g = sample_er(5, EdgesPerNode{1.5}, grng);
    const ScmSpec spec = make_random_scm(g, MechanismKind::Mlp, NoiseMode::Gaussian, 5);
    for (const auto& [node, mech] : spec.mechanisms) {
        const auto& m = std::get<MlpMechanism>(mech);
        EXPECT_GT(m.norm, 0.0);
        EXPECT_NE(m.norm, 1.0);  // calibration ran
    }
    // same seed, same calibration
    const ScmSpec again = make_random_scm(g, MechanismKind::Mlp, NoiseMode::Gaussian, 5);
    for (const auto& [node, mech] : spec.mechanisms)
        EXPECT_DOUBLE_EQ(std::get<MlpMechanism>(mech).norm,
                         std::get<MlpMechanism>(again.mechanisms.at(node)).norm);
}

TEST(ScmSpecValidation, MechanismsExactlyOnNonRoots) {
    ScmSpec spec;
    spec.graph.d = 2;
    spec.graph.edges = {{0, 1}};
    spec.noise.assign(2, NoiseSpec{});
    Rng rng = make_rng(0);
    EXPECT_THROW(sample_dataset(spec, 10, rng), ParameterError);  // missing mechanism on node 1
    spec.mechanisms.emplace(0, Polynomial{{{1.0, {1}}}});         // mechanism on a root
    spec.mechanisms.emplace(1, Polynomial{{{1.0, {1}}}});
    EXPECT_THROW(sample_dataset(spec, 10, rng), ParameterError);
}
