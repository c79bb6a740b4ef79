#include <gtest/gtest.h>

#include <sstream>

#include "projreg/bounds.hpp"
#include "projreg/data_model.hpp"
#include "test_util.hpp"

using namespace projreg;

namespace {

CovarianceSpec cov(CovarianceKind kind, Eigen::Index p) {
    CovarianceSpec s;
    s.kind = kind;
    s.p = p;
    return s;
}

BetaSpec beta_snr(BetaKind kind, double snr) {
    BetaSpec b;
    b.kind = kind;
    b.snr = snr;
    return b;
}

}  // namespace

TEST(Covariance, ClosedFormSpectra) {
    EXPECT_TRUE(build_covariance(cov(CovarianceKind::isotropic, 5), 0).isApprox(Matrix::Identity(5, 5)));

    const Matrix g = build_covariance(cov(CovarianceKind::gapped, 75), 0);
    for (int i = 0; i < 75; ++i) EXPECT_DOUBLE_EQ(g(i, i), i < 16 ? 1.0 : 0.01);
    EXPECT_NEAR(effective_rank(g), 16.0 + 0.59, 1e-12);

    const Matrix e = build_covariance(cov(CovarianceKind::exp_decay, 10), 0);
    for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(e(i, i), std::pow(2.0, -0.5 * i));
    const Matrix pd = build_covariance(cov(CovarianceKind::poly_decay, 10), 0);
    for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(pd(i, i), 1.0 / ((i + 1.0) * (i + 1.0)));

    for (auto kind : {CovarianceKind::gapped, CovarianceKind::exp_decay, CovarianceKind::poly_decay}) {
        const Matrix c = build_covariance(cov(kind, 40), 0);
        EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
        EXPECT_LT(effective_rank(c), 40.0);
    }
    EXPECT_DOUBLE_EQ(effective_rank(build_covariance(cov(CovarianceKind::isotropic, 40), 0)), 40.0);
}

TEST(Covariance, EffectiveRankExamples) {
    Vector l = Vector::Constant(75, 0.01);
    l(0) = 1.0;
    EXPECT_NEAR(effective_rank(l), 1.74, 1e-12);
    const Matrix e = build_covariance(cov(CovarianceKind::exp_decay, 400), 0);
    EXPECT_LE(effective_rank(e), 1.0 / (1.0 - std::pow(2.0, -0.5)) + 1e-12);
    EXPECT_THROW(effective_rank(Vector(Vector::Zero(3))), Error);
}

TEST(Covariance, InvalidParameters) {
    auto s = cov(CovarianceKind::gapped, 10);
    s.gap_ratio = 1.5;
    EXPECT_THROW(build_covariance(s, 0), Error);
    s = cov(CovarianceKind::exp_decay, 10);
    s.exp_rate = -1;
    EXPECT_THROW(build_covariance(s, 0), Error);
    EXPECT_THROW(build_covariance(cov(CovarianceKind::isotropic, 0), 0), Error);
}

TEST(Covariance, WishartGappedKeepsGapUnderTruncation) {
    auto s = cov(CovarianceKind::wishart_gapped, 64);
    s.ambient = 512;
    s.k_gap = 32;
    s.rescale = 100.0;
    const Matrix big = build_covariance(s, 99);
    EXPECT_EQ(big.rows(), 512);
    const Vector lb = eig_sym(big).values;
    EXPECT_GT(lb(31) / lb(32), 10.0);
    // not renormalized: the top block scale follows W W^T
    EXPECT_GT(lb(0), 100.0 * 512.0);

    BetaSpec b = beta_snr(BetaKind::gaussian_iso, 4.0);
    const DataModel ambient = build_ambient_model(s, b, 7);
    const DataModel m64 = truncate_model(ambient, 64);
    EXPECT_TRUE(m64.cxx.isApprox(ambient.cxx.topLeftCorner(64, 64)));
    EXPECT_TRUE(m64.beta.isApprox(ambient.beta.head(64)));
    EXPECT_EQ(m64.sigma, ambient.sigma);
    // the largest consecutive eigenvalue ratio stays at the planted gap
    for (Eigen::Index p : {64, 128}) {
        const Vector l = truncate_model(ambient, p).spectral.values;
        Eigen::Index arg = 0;
        (l.head(p - 2).array() / l.segment(1, p - 2).array()).maxCoeff(&arg);
        EXPECT_EQ(arg, 31);
        if (p == 128) EXPECT_GT(l(31) / l(32), 10.0);
    }
}

TEST(Truncate, IdentityAndDiagonal) {
    auto m = testing_util::diag_model((Vector(3) << 3, 2, 1).finished(), (Vector(3) << 1, 2, 3).finished(), 0.5);
    const DataModel same = truncate_model(*m, 3);
    EXPECT_EQ(same.cxx, m->cxx);
    const DataModel two = truncate_model(*m, 2);
    EXPECT_EQ(two.cxx, Matrix((Vector(2) << 3, 2).finished().asDiagonal()));
    EXPECT_THROW(truncate_model(*m, 4), Error);
    EXPECT_THROW(truncate_model(*m, 0), Error);
}

TEST(Beta, SnrAndKinds) {
    BetaSpec fixed;
    fixed.kind = BetaKind::fixed;
    fixed.fixed = (Vector(2) << 3, 4).finished();
    fixed.snr = 5.0;
    const auto spec2 = eig_sym(Matrix::Identity(2, 2));
    EXPECT_DOUBLE_EQ(build_beta(fixed, spec2, 0).sigma, 1.0);

    const auto spec75 = eig_sym(build_covariance(cov(CovarianceKind::gapped, 75), 0));
    for (double snr : {16.0, 2.0}) {
        const BetaDraw d = build_beta(beta_snr(BetaKind::gaussian_iso, snr), spec75, 3);
        EXPECT_NEAR(d.sigma, d.beta.norm() / snr, 1e-14);
    }

    const BetaDraw ramp = build_beta(beta_snr(BetaKind::misaligned_ramp, 1.0), spec75, 0);
    const Vector coef = spec75.vectors.transpose() * ramp.beta;
    for (int i = 0; i < 75; ++i) EXPECT_NEAR(coef(i), i + 1.0, 1e-9);

    BetaSpec matched = beta_snr(BetaKind::misaligned_ramp, 16.0);
    matched.match_gaussian_noise = true;
    EXPECT_DOUBLE_EQ(build_beta(matched, spec75, 3).sigma, build_beta(beta_snr(BetaKind::gaussian_iso, 16.0), spec75, 3).sigma);

    BetaSpec bad = beta_snr(BetaKind::gaussian_iso, -1.0);
    EXPECT_THROW(build_beta(bad, spec75, 0), Error);
    BetaSpec none;
    EXPECT_THROW(build_beta(none, spec75, 0), Error);
}

TEST(Sample, DeterministicAndNoiseless) {
    auto m = testing_util::diag_model(Vector::Ones(4), (Vector(4) << 1, -1, 2, 0).finished(), 0.0);
    const Dataset a = sample(m, 30, 5), b = sample(m, 30, 5), c = sample(m, 30, 6);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    EXPECT_NE(a.x, c.x);
    EXPECT_EQ(a.y, a.x * m->beta);
    EXPECT_THROW(sample(m, 0, 1), Error);
}

TEST(Sample, EmpiricalCovarianceConcentrates) {
    auto m = testing_util::diag_model(Vector::Ones(4), Vector::Ones(4), 1.0);
    const Dataset d = sample(m, 2000, 11);
    const Matrix emp = d.x.transpose() * d.x / 2000.0;
    EXPECT_LT(symmetric_operator_norm(emp - Matrix::Identity(4, 4)), 0.15);

    Rng rng(4);
    auto dense = testing_util::random_model(rng, 5);
    const Dataset big = sample(dense, 20000, 12);
    const Matrix emp2 = big.x.transpose() * big.x / 20000.0;
    EXPECT_LT(symmetric_operator_norm(emp2 - dense->cxx), 0.1 * symmetric_operator_norm(dense->cxx));
}

TEST(Sample, NoiseLawHasZeroMean) {
    auto m = testing_util::diag_model(Vector::Ones(3), Vector::Ones(3), 2.0);
    double total = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        const Dataset d = sample(m, 1, derive_seed(77, {static_cast<std::uint64_t>(r)}));
        total += d.y(0) - d.x.row(0).dot(m->beta);
    }
    EXPECT_LT(std::abs(total / reps), 4.0 * 2.0 / 100.0);
}

TEST(DataModel, RejectsInvalid) {
    Matrix c = Matrix::Identity(2, 2);
    c(1, 1) = -1.0;
    EXPECT_THROW(DataModel::create(c, Vector::Ones(2), 1.0), Error);
    EXPECT_THROW(DataModel::create(Matrix::Identity(2, 2), Vector::Ones(3), 1.0), Error);
    EXPECT_THROW(DataModel::create(Matrix::Identity(2, 2), Vector::Ones(2), -1.0), Error);
}

TEST(Csv, RoundTrip) {
    Rng rng(8);
    auto m = testing_util::random_model(rng, 3);
    const Dataset d = sample(m, 6, 1);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "x_1,x_2,x_3,y");
    const Dataset back = read_dataset_csv(ss);
    EXPECT_EQ(back.x, d.x);
    EXPECT_EQ(back.y, d.y);

    std::stringstream bad("x_1,y\n1,2\n3\n");
    EXPECT_THROW(read_dataset_csv(bad), Error);
}
