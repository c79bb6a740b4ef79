#include <gtest/gtest.h>

#include "oracles.hpp"
#include "projreg/estimators.hpp"
#include "test_util.hpp"

using namespace projreg;
using testing_util::gaussian;

namespace {

Dataset make_data(Rng& rng, Eigen::Index n, Eigen::Index p, double noise = 0.3) {
    Dataset d;
    d.x = gaussian(rng, n, p);
    d.y = d.x * gaussian(rng, p) + noise * gaussian(rng, n);
    return d;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Ols, ClosedFormExamples) {
    Dataset d{Matrix::Identity(3, 3), (Vector(3) << 1, 2, 3).finished()};
    EXPECT_LE(max_abs(fit_ols(d).beta_hat - d.y), 1e-14);

    Dataset one{(Matrix(1, 2) << 1, 1).finished(), (Vector(1) << 2).finished()};
    EXPECT_LE(max_abs(fit_ols(one).beta_hat - Vector::Ones(2)), 1e-14);
}

TEST(Ols, MatchesNormalEquationsAndMinNorm) {
    Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset tall = make_data(rng, 8, 3);
        EXPECT_LE(max_abs(fit_ols(tall).beta_hat - oracle::ridge_normal_equations(tall.x, tall.y, 0.0)), 1e-9);

        const Dataset wide = make_data(rng, 6, 15);
        const FitResult f = fit_ols(wide);
        EXPECT_LE((wide.x * f.beta_hat - wide.y).norm(), 1e-8 * wide.y.norm());
        const Matrix prow = projector_onto_columns(wide.x.transpose());
        EXPECT_LE((f.beta_hat - prow * f.beta_hat).norm(), 1e-8 * f.beta_hat.norm());
    }
}

TEST(Ridge, ClosedFormsAndLimits) {
    Dataset d{(Matrix(2, 1) << 1, 1).finished(), (Vector(2) << 1, 1).finished()};
    EXPECT_NEAR(fit_ridge(d, 1.0).beta_hat(0), 0.5, 1e-14);

    Rng rng(2);
    const Dataset tall = make_data(rng, 20, 5);
    EXPECT_LE(max_abs(fit_ridge(tall, 0.0).beta_hat - fit_ols(tall).beta_hat), 1e-9);
    for (double lam : {0.1, 10.0, 1e4}) {
        const FitResult f = fit_ridge(tall, lam);
        EXPECT_LE(max_abs(f.beta_hat - oracle::ridge_normal_equations(tall.x, tall.y, 20.0 * lam)), 1e-9);
        EXPECT_LE(f.beta_hat.norm(), (tall.x.transpose() * tall.y).norm() / (20.0 * lam) + 1e-12);
    }

    const Dataset wide = make_data(rng, 6, 15);
    EXPECT_THROW(fit_ridge(wide, 0.0), Error);
    EXPECT_THROW(fit_ridge(wide, -1.0), Error);
    const Vector ols = fit_ols(wide).beta_hat;
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {1e-2, 1e-4, 1e-6}) {
        const double dist = (fit_ridge(wide, lam).beta_hat - ols).norm();
        EXPECT_LT(dist, prev);
        prev = dist;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(RidgeLoocv, ShortcutMatchesRefitOracle) {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = make_data(rng, 20, 5, 3.0);
        const auto grid = log_grid(1e-4, 1e2, 13);
        const RidgeSelection sel = select_ridge_loocv(d, grid);
        double best = std::numeric_limits<double>::infinity();
        double best_l = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double o = oracle::loo_refit_score(d.x, d.y, grid[i]);
            EXPECT_NEAR(sel.scores[i], o, 1e-9 * std::max(1.0, o));
            if (o <= best) {
                best = o;
                best_l = grid[i];
            }
        }
        EXPECT_EQ(sel.lambda, best_l);
    }
}

TEST(RidgeLoocv, SingletonNoiselessAndDegenerate) {
    Rng rng(4);
    const Dataset d = make_data(rng, 15, 4);
    EXPECT_EQ(select_ridge_loocv(d, {0.3}).lambda, 0.3);

    Dataset clean = d;
    clean.y = d.x * gaussian(rng, 4);
    EXPECT_EQ(select_ridge_loocv(clean, {0.0, 1.0}).lambda, 0.0);

    const Dataset wide = make_data(rng, 6, 15);
    EXPECT_THROW(select_ridge_loocv(wide, {0.0}), Error);
    const RidgeSelection s = select_ridge_loocv(wide, {0.0, 0.1});
    EXPECT_TRUE(std::isinf(s.scores[0]));
    EXPECT_EQ(s.lambda, 0.1);
    EXPECT_THROW(select_ridge_loocv(wide, {}), Error);
}

TEST(PcaOls, ExamplesAndReductions) {
    Dataset diag{(Matrix(2, 2) << 3, 0, 0, 1).finished(), (Vector(2) << 3, 1).finished()};
    const FitResult f = fit_pca_ols(diag, 1);
    EXPECT_NEAR(f.beta_hat(0), 1.0, 1e-14);
    EXPECT_NEAR(f.beta_hat(1), 0.0, 1e-14);

    Rng rng(5);
    const Dataset d = make_data(rng, 10, 6);
    EXPECT_LE(max_abs(fit_pca_ols(d, 6).beta_hat - fit_ols(d).beta_hat), 1e-9);
    const Matrix v3 = svd(d.x).v.leftCols(3);
    const Vector alt = v3 * oracle::lstsq_qr(d.x * v3, d.y);
    EXPECT_LE(max_abs(fit_pca_ols(d, 3).beta_hat - alt), 1e-9);
    EXPECT_THROW(fit_pca_ols(d, 0), Error);
    EXPECT_THROW(fit_pca_ols(d, 7), Error);
}

TEST(OraclePcr, TruncatesColumns) {
    auto m = testing_util::diag_model((Vector(2) << 2, 1).finished(), Vector::Ones(2), 0.5);
    Rng rng(6);
    for (int rep = 0; rep < 5; ++rep) {
        const Dataset d = sample(m, 5, rep);
        EXPECT_EQ(fit_oracle_pcr(d, *m, 1).beta_hat(1), 0.0);
        EXPECT_LE(max_abs(fit_oracle_pcr(d, *m, 2).beta_hat - fit_ols(d).beta_hat), 1e-9);
    }
    auto iso = testing_util::diag_model(Vector::Ones(4), Vector::Ones(4), 0.5);
    EXPECT_THROW(fit_oracle_pcr(sample(iso, 5, 1), *iso, 5), Error);
}

TEST(OraclePcr, MatchesOrthogonalProjectionOnIsotropicData) {
    // equivalence holds in distribution over an isotropic beta
    const int seeds = 200;
    std::vector<double> a, b;
    Rng beta_rng(1);
    for (int s = 0; s < seeds; ++s) {
        auto m = testing_util::diag_model(Vector::Ones(8), gaussian(beta_rng, 8), 0.5);
        const Dataset d = sample(m, 12, derive_seed(5, {static_cast<std::uint64_t>(s)}));
        const Dataset t = sample(m, 100, derive_seed(6, {static_cast<std::uint64_t>(s)}));
        a.push_back((t.x * fit_oracle_pcr(d, *m, 3).beta_hat - t.y).squaredNorm() / 100.0);
        b.push_back((t.x * fit_random_projection(d, RandomProjectionKind::orthogonal, 3, s).beta_hat - t.y).squaredNorm() / 100.0);
    }
    auto mean_se = [&](const std::vector<double>& v) {
        double mu = 0, ss = 0;
        for (double x : v) mu += x;
        mu /= v.size();
        for (double x : v) ss += (x - mu) * (x - mu);
        return std::pair{mu, std::sqrt(ss / (v.size() - 1) / v.size())};
    };
    const auto [ma, sa] = mean_se(a);
    const auto [mb, sb] = mean_se(b);
    EXPECT_LT(std::abs(ma - mb), 3.0 * std::hypot(sa, sb));
}

TEST(Pls, MatchesNipals) {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = make_data(rng, 12, 8);
        for (int k = 1; k <= 4; ++k) {
            const FitResult f = fit_pls(d, k);
            EXPECT_FALSE(f.resolvent.has_value());
            EXPECT_LE(max_abs(d.x * f.beta_hat - oracle::nipals_pls1_predictions(d.x, d.y, k)), 1e-6);
        }
    }
}

TEST(Pls, OneComponentAndFullSpan) {
    Rng rng(8);
    const Dataset d = make_data(rng, 10, 5);
    const Vector s = d.x.transpose() * d.y;
    const Vector feat = d.x * s;
    const double coef = feat.dot(d.y) / feat.squaredNorm();
    EXPECT_LE(max_abs(fit_pls(d, 1).beta_hat - coef * s), 1e-10);

    Dataset orth;
    orth.x = Eigen::HouseholderQR<Matrix>(gaussian(rng, 10, 4)).householderQ() * Matrix::Identity(10, 4);
    orth.x *= Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
    orth.y = gaussian(rng, 10);
    EXPECT_LE(max_abs(fit_pls(orth, 4).beta_hat - fit_ols(orth).beta_hat), 1e-8);

    Dataset zero{gaussian(rng, 4, 3), Vector::Zero(4)};
    EXPECT_THROW(fit_pls(zero, 1), Error);
}

TEST(Pls, FlagsKrylovBreakdown) {
    // X^T X has two distinct eigenvalues, so the Krylov space stops at 2
    Dataset d;
    d.x = Matrix::Zero(6, 4);
    d.x.topLeftCorner(4, 4) = Vector((Vector(4) << 2, 2, 1, 1).finished()).asDiagonal();
    d.y = Vector::Ones(6);
    const FitResult f = fit_pls(d, 4);
    EXPECT_TRUE(f.diagnostics.krylov_breakdown);
    EXPECT_EQ(f.diagnostics.effective_k, 2);
}

TEST(RandomProjection, OrthogonalInvariantsAndReduction) {
    for (auto [p, k] : {std::pair<Eigen::Index, Eigen::Index>{10, 4}, {10, 10}, {6, 9}}) {
        const ProjectionMatrix pr = random_projection(RandomProjectionKind::orthogonal, p, k, 3);
        EXPECT_EQ(pr.pi.rows(), p);
        EXPECT_EQ(pr.pi.cols(), k);
        if (k <= p)
            EXPECT_LE(max_abs(pr.pi.transpose() * pr.pi - Matrix::Identity(k, k)), 1e-12);
        else
            EXPECT_LE(max_abs(pr.pi * pr.pi.transpose() - Matrix::Identity(p, p)), 1e-12);
    }
    Rng rng(9);
    const Dataset d = make_data(rng, 7, 10);
    EXPECT_LE(max_abs(fit_random_projection(d, RandomProjectionKind::orthogonal, 10, 4).beta_hat - fit_ols(d).beta_hat), 1e-9);
    const ProjectionMatrix a = random_projection(RandomProjectionKind::gaussian, 10, 3, 4);
    EXPECT_EQ(a.pi, random_projection(RandomProjectionKind::gaussian, 10, 3, 4).pi);
}

TEST(RandomProjection, GaussianRankOneAndInterpolation) {
    Dataset d{Matrix::Identity(2, 2), (Vector(2) << 1, 0).finished()};
    const FitResult f = fit_random_projection(d, RandomProjectionKind::gaussian, 1, 11);
    const Vector w = random_projection(RandomProjectionKind::gaussian, 2, 1, 11).pi.col(0);
    const Vector feat = d.x * w;
    EXPECT_LE(max_abs(f.beta_hat - w * (feat.dot(d.y) / feat.squaredNorm())), 1e-14);

    Rng rng(10);
    const Dataset big = make_data(rng, 50, 75);
    const FitResult g = fit_random_projection(big, RandomProjectionKind::gaussian, 500, 2);
    EXPECT_LE((big.x * g.beta_hat - big.y).norm(), 1e-8 * big.y.norm());
}

TEST(RandomProjection, RidgeOnProjectedCoefficients) {
    Rng rng(11);
    const Dataset d = make_data(rng, 12, 8);
    const ProjectionMatrix pr = random_projection(RandomProjectionKind::orthogonal, 8, 5, 1);
    const FitResult f = fit_projected(d, pr, 0.2);
    const Vector c = oracle::ridge_normal_equations(d.x * pr.pi, d.y, 12 * 0.2);
    EXPECT_LE(max_abs(f.beta_hat - pr.pi * c), 1e-10);
    const FitResult cv = fit_projected_ridge_cv(d, pr, log_grid(1e-3, 10, 9));
    EXPECT_EQ(cv.method, Method::ortho_ridge);
    EXPECT_TRUE(cv.lambda.has_value());
}

TEST(Resolvent, LinearInY) {
    Rng rng(12);
    auto m = testing_util::random_model(rng, 6);
    const Dataset d = sample(m, 9, 3);
    Dataset d2 = d;
    const Vector delta = gaussian(rng, 9);
    d2.y += delta;
    const std::vector<FitResult> fits = {fit_ols(d), fit_ridge(d, 0.1), fit_pca_ols(d, 3), fit_oracle_pcr(d, *m, 2),
                                         fit_random_projection(d, RandomProjectionKind::gaussian, 4, 1)};
    const std::vector<FitResult> fits2 = {fit_ols(d2), fit_ridge(d2, 0.1), fit_pca_ols(d2, 3), fit_oracle_pcr(d2, *m, 2),
                                          fit_random_projection(d2, RandomProjectionKind::gaussian, 4, 1)};
    for (std::size_t i = 0; i < fits.size(); ++i) {
        ASSERT_TRUE(fits[i].resolvent);
        EXPECT_LE((*fits[i].resolvent * d.y - fits[i].beta_hat).norm(), 1e-8 * fits[i].beta_hat.norm());
        EXPECT_LE(max_abs(fits2[i].beta_hat - fits[i].beta_hat - *fits[i].resolvent * delta), 1e-8);
    }
}

TEST(Interpolation, FullRankProjectionsFitTrainingData) {
    Rng rng(13);
    const Dataset d = make_data(rng, 8, 20);
    for (const FitResult& f : {fit_ols(d), fit_pca_ols(d, 8), fit_random_projection(d, RandomProjectionKind::orthogonal, 12, 1),
                               fit_pls(d, 8)})
        EXPECT_LE((d.x * f.beta_hat - d.y).norm(), 1e-8 * d.y.norm());
}

TEST(Generative, UnconstrainedReachesPcaObjective) {
    Rng rng(14);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = make_data(rng, 15, 10);
        GenerativeOptions o;
        o.constrained = false;
        for (int k : {1, 3}) {
            const FitResult f = fit_generative(d, k, std::nullopt, o);
            const double target = oracle::rank_k_residual(d.x, k);
            EXPECT_NEAR(generative_objective(f), target, 1e-6 * target);
        }
    }
}

TEST(Generative, ConstrainedMatchesClosedFormOptimum) {
    Rng rng(15);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = make_data(rng, 12, 7);
        for (int k : {1, 2, 3}) {
            const FitResult f = fit_generative(d, k);
            const auto& h = f.diagnostics.objective_history;
            for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] * (1.0 + 1e-12));
            EXPECT_LE(f.diagnostics.constraint_residual, 1e-8 * std::max(1.0, d.y.cwiseAbs().maxCoeff()));
            const double target = oracle::generative_constrained_optimum(d.x, d.y, k);
            EXPECT_NEAR(generative_objective(f), target, 1e-5 * std::max(1.0, target));
        }
    }
}

TEST(Generative, MultiStartOnTinyInstance) {
    Rng rng(16);
    const Dataset d = make_data(rng, 4, 3);
    const double target = oracle::generative_constrained_optimum(d.x, d.y, 2);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 100; ++s) {
        GenerativeOptions o;
        o.init_seed = s;
        o.max_iters = 2000;
        try {
            const double v = generative_objective(fit_generative(d, 2, std::nullopt, o));
            EXPECT_GE(v, target - 1e-9);
            best = std::min(best, v);
        } catch (const Error&) {
        }
    }
    EXPECT_NEAR(generative_objective(fit_generative(d, 2)), best, 1e-4 * std::max(1.0, best));
}

TEST(Generative, RealizableModelIsExact) {
    Rng rng(17);
    const Matrix z = gaussian(rng, 10, 2);
    const Matrix q = gaussian(rng, 2, 5);
    Dataset d{z * q, z.col(0)};
    const FitResult f = fit_generative(d, 2);
    EXPECT_LE(generative_objective(f), 1e-16 * d.x.squaredNorm());
    EXPECT_LE(f.diagnostics.constraint_residual, 1e-10);
    EXPECT_LE((d.x * f.beta_hat - d.y).norm(), 1e-8 * d.y.norm());
}

TEST(Generative, RejectsBadArguments) {
    Rng rng(18);
    const Dataset d = make_data(rng, 6, 4);
    EXPECT_THROW(fit_generative(d, 0), Error);
    EXPECT_THROW(fit_generative(d, 2, Vector(Vector::Zero(2))), Error);
    EXPECT_THROW(fit_generative(d, 2, Vector(Vector::Ones(3))), Error);
}

TEST(Baselines, NullAndTruth) {
    Rng rng(19);
    auto m = testing_util::random_model(rng, 5);
    const auto [null_fit, truth] = null_and_truth_baselines(*m);
    EXPECT_TRUE(null_fit.constant);
    EXPECT_EQ(null_fit.beta_hat, Vector::Zero(5));
    EXPECT_EQ(truth.beta_hat, m->beta);
}

TEST(MethodNames, RoundTrip) {
    for (Method m : {Method::ols, Method::ridge, Method::ridge_cv, Method::pca_ols, Method::oracle_pcr, Method::pls,
                     Method::gaussian_proj, Method::ortho_proj, Method::ortho_ridge, Method::generative, Method::null, Method::truth})
        EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_FALSE(method_from_string("lasso"));
}
