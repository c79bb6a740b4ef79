#pragma once

// Single-point data poisoning: append (x0, y0) with ||x0|| <= eps, |y0| <= eps
// to the training set and refit.
//
// For p > n the poison point is a combination of the sample directions plus
// a small off-span component. The off-span energy
//   h = x0^T (I - X^T (X X^T)^{-1} X) x0
// enters the refit min-norm OLS solution as 1/h, so h -> 0 blows it up.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "projreg/data_model.hpp"
#include "projreg/estimators.hpp"
#include "projreg/numerics.hpp"
#include "projreg/risk.hpp"
#include "projreg/rng.hpp"

namespace projreg {

enum class AlphaMode { random, uniform };

struct AttackSpec {
    double epsilon = 1.0;
    double delta = 1e-6;
    std::uint64_t seed = 0;
    AlphaMode alpha_mode = AlphaMode::random;
    std::optional<double> y0;  // defaults to epsilon

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorCode::BadParams, "epsilon must be > 0");
        if (!(delta >= 0.0) || !std::isfinite(delta)) fail(ErrorCode::BadParams, "delta must be >= 0");
        if (y0 && !(std::abs(*y0) <= epsilon * (1.0 + 1e-12))) fail(ErrorCode::BadParams, "|y0| must not exceed epsilon");
    }
};

struct PoisonedDataset {
    Matrix x_tilde;  // (n+1) x p, poison point in the last row
    Vector y_tilde;
    Vector x0;
    double y0 = 0.0;
    double h = 0.0;
    AttackSpec spec;

    Dataset as_dataset(const std::shared_ptr<const DataModel>& model = nullptr) const {
        return {x_tilde, y_tilde, spec.seed, model};
    }
};

/// h via a complete QR factorization of X^T: the trailing p - n columns of Q
/// span the orthogonal complement of the rows of X. Requires X X^T invertible.
inline double leverage_h(const Vector& x0, const Matrix& x, double rank_tol = kDefaultRankTol) {
    const Eigen::Index n = x.rows(), p = x.cols();
    if (x0.size() != p) fail(ErrorCode::BadSpec, "x0 has wrong length");
    require_finite(x0, "x0");
    if (n > p) fail(ErrorCode::SingularGram, "X X^T is singular when n > p");
    Eigen::HouseholderQR<Matrix> qr(x.transpose());
    const Vector diag = qr.matrixQR().diagonal().cwiseAbs();
    if (n > 0 && diag.minCoeff() <= rank_tol * std::max(diag.maxCoeff(), std::numeric_limits<double>::min()))
        fail(ErrorCode::SingularGram, "X X^T is singular");
    const Vector qtx = qr.householderQ().adjoint() * x0;
    return qtx.tail(p - n).squaredNorm();
}

inline double leverage_h(const Vector& x0, const Dataset& data, double rank_tol = kDefaultRankTol) {
    return leverage_h(x0, data.x, rank_tol);
}

/// ||(I - V V^T) x0||^2 for an orthonormal basis V of the sample span.
inline double off_span_energy(const Vector& x0, const Matrix& basis) {
    Vector r = x0 - basis * (basis.transpose() * x0);
    r -= basis * (basis.transpose() * r);
    return r.squaredNorm();
}

/// x0 = eps * normalize(basis * alpha + delta * g) with g a unit vector
/// orthogonal to the basis.
inline Vector make_poison_point(const Matrix& basis, const Vector& alpha, const Vector& g, double eps, double delta) {
    const Vector raw = basis * alpha + delta * g;
    const double nrm = raw.norm();
    if (!(nrm > 0.0)) fail(ErrorCode::BadParams, "poison direction is zero");
    return eps * raw / nrm;
}

inline PoisonedDataset craft_poison(const Dataset& data, const AttackSpec& spec, double rank_tol = kDefaultRankTol) {
    spec.validate();
    require_finite(data.x, "X");
    const Eigen::Index n = data.n(), p = data.p();
    const Matrix basis = column_space_basis(data.x.transpose(), rank_tol);  // row space of X
    const Eigen::Index r = basis.cols();
    if (r == 0) fail(ErrorCode::BadRank, "training samples span nothing");

    Rng rng(derive_seed(spec.seed, {0xA77Au}));
    Vector alpha(r);
    for (Eigen::Index i = 0; i < r; ++i) alpha(i) = spec.alpha_mode == AlphaMode::random ? rng.normal() : 1.0;

    Vector g = Vector::Zero(p);
    if (spec.delta > 0.0) {
        if (r >= p) fail(ErrorCode::FullSpan, "the samples span R^p; no off-span direction exists");
        for (Eigen::Index i = 0; i < p; ++i) g(i) = rng.normal();
        g -= basis * (basis.transpose() * g);
        g -= basis * (basis.transpose() * g);
        g.normalize();
    }

    PoisonedDataset out;
    out.spec = spec;
    out.x0 = make_poison_point(basis, alpha, g, spec.epsilon, spec.delta);
    out.y0 = spec.y0.value_or(spec.epsilon);
    out.x_tilde.resize(n + 1, p);
    out.x_tilde.topRows(n) = data.x;
    out.x_tilde.row(n) = out.x0.transpose();
    out.y_tilde.resize(n + 1);
    out.y_tilde.head(n) = data.y;
    out.y_tilde(n) = out.y0;
    if (r == n && n < p)
        out.h = leverage_h(out.x0, data.x, rank_tol);
    else
        out.h = off_span_energy(out.x0, basis);
    return out;
}

/// Underparameterized rank-one attack (heuristic): x0 = eps * v_min, the
/// bottom eigenvector of X^T X, with y0 = -eps * sign(v_min^T beta_ols) so the
/// label pulls the refit against the current estimate. A PSD rank-one update
/// cannot lower any eigenvalue of X^T X; the refit moves by
///   eps (y0 - x0^T beta_ols) / (lambda_min + eps^2)
/// along v_min, which is large only when lambda_min is small next to eps^2.
inline PoisonedDataset craft_underparam_poison(const Dataset& data, double epsilon) {
    if (!(epsilon > 0.0)) fail(ErrorCode::BadParams, "epsilon must be > 0");
    const Eigen::Index n = data.n(), p = data.p();
    if (n < p) fail(ErrorCode::BadRank, "underparameterized attack needs n >= p");
    const SpectralDecomposition d = eig_sym(data.x.transpose() * data.x);
    const Vector v = d.vectors.col(p - 1);
    const Vector b = fit_ols(data).beta_hat;
    PoisonedDataset out;
    out.spec.epsilon = epsilon;
    out.spec.delta = 0.0;
    out.x0 = epsilon * v;
    out.y0 = v.dot(b) >= 0.0 ? -epsilon : epsilon;
    out.spec.y0 = out.y0;
    out.x_tilde.resize(n + 1, p);
    out.x_tilde.topRows(n) = data.x;
    out.x_tilde.row(n) = out.x0.transpose();
    out.y_tilde.resize(n + 1);
    out.y_tilde.head(n) = data.y;
    out.y_tilde(n) = out.y0;
    out.h = 0.0;
    return out;
}

struct AttackMethod {
    Method method = Method::ols;
    std::optional<Eigen::Index> k;
    std::vector<double> lambda_grid;  // ridge_cv only
};

struct AttackRow {
    Method method = Method::ols;
    Eigen::Index n = 0, p = 0;
    std::optional<Eigen::Index> k;
    std::optional<double> lambda;
    double epsilon = 0.0, delta = 0.0, h = 0.0;
    double mse_clean = 0.0, mse_poisoned = 0.0, ratio = 0.0;
    std::string error;  // non-empty when a fit failed
};

inline std::vector<double> default_ridge_grid() { return log_grid(1e-6, 1e2, 41); }

/// Refits each method on clean and poisoned data and scores both on a
/// common test set of n_test fresh samples from the clean model. Ridge
/// selects lambda by LOOCV on the clean data and keeps it for the refit.
/// Fit failures are recorded on the row.
inline std::vector<AttackRow> evaluate_attack(const std::vector<AttackMethod>& methods, const Dataset& data,
                                              const std::shared_ptr<const DataModel>& model, const PoisonedDataset& poisoned,
                                              Eigen::Index n_test = 256) {
    if (!model) fail(ErrorCode::BadSpec, "evaluate_attack needs the clean model");
    const Dataset test = sample(model, n_test, derive_seed(poisoned.spec.seed, {0x7E57u}));
    const Dataset dirty = poisoned.as_dataset(model);
    std::vector<AttackRow> rows;
    for (const AttackMethod& m : methods) {
        AttackRow row;
        row.method = m.method;
        row.n = data.n();
        row.p = data.p();
        row.k = m.k;
        row.epsilon = poisoned.spec.epsilon;
        row.delta = poisoned.spec.delta;
        row.h = poisoned.h;
        try {
            FitResult clean, bad;
            switch (m.method) {
            case Method::ols:
                clean = fit_ols(data);
                bad = fit_ols(dirty);
                break;
            case Method::ridge:
            case Method::ridge_cv: {
                const RidgeSelection sel = select_ridge_loocv(data, m.lambda_grid.empty() ? default_ridge_grid() : m.lambda_grid);
                row.lambda = sel.lambda;
                clean = sel.fit;
                bad = fit_ridge(dirty, sel.lambda);
                break;
            }
            case Method::pca_ols:
                if (!m.k) fail(ErrorCode::BadParams, "pca_ols needs k");
                clean = fit_pca_ols(data, *m.k);
                bad = fit_pca_ols(dirty, *m.k);
                break;
            case Method::pls:
                if (!m.k) fail(ErrorCode::BadParams, "pls needs k");
                clean = fit_pls(data, *m.k);
                bad = fit_pls(dirty, *m.k);
                break;
            case Method::generative:
                if (!m.k) fail(ErrorCode::BadParams, "generative needs k");
                clean = fit_generative(data, *m.k);
                bad = fit_generative(dirty, *m.k);
                break;
            default: fail(ErrorCode::BadParams, std::string("attack evaluation does not support ") + std::string(to_string(m.method)));
            }
            row.mse_clean = test_mse(clean.beta_hat, test);
            row.mse_poisoned = test_mse(bad.beta_hat, test);
            row.ratio = row.mse_poisoned / row.mse_clean;
        } catch (const Error& e) {
            row.error = e.what();
            row.mse_clean = row.mse_poisoned = row.ratio = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Residual of x0 off the top-k principal subspace of the clean data,
/// compared with the 99th percentile of the clean rows' residuals, plus the
/// relative change of the k-th empirical eigenvalue caused by the poison.
struct OutlierDiagnostic {
    double poison_residual = 0.0;
    double clean_p99 = 0.0;
    bool is_outlier = false;
    double lambda_k_shift = 0.0;  // (lambda_k(X~^T X~) - lambda_k(X^T X)) / lambda_k(X^T X)
};

inline OutlierDiagnostic outlier_diagnostic(const Dataset& data, const Vector& x0, Eigen::Index k) {
    const Eigen::Index n = data.n(), p = data.p();
    if (x0.size() != p) fail(ErrorCode::BadSpec, "x0 has wrong length");
    if (k < 1 || k >= std::min(n, p)) fail(ErrorCode::BadRank, "k must lie in [1, min(n,p))");
    const SvdDecomposition d = svd(data.x);
    const Matrix vk = d.v.leftCols(k);
    std::vector<double> res(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector xi = data.x.row(i).transpose();
        res[static_cast<std::size_t>(i)] = (xi - vk * (vk.transpose() * xi)).norm();
    }
    std::sort(res.begin(), res.end());
    const double pos = 0.99 * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, res.size() - 1);
    const double frac = pos - static_cast<double>(lo);

    OutlierDiagnostic o;
    o.clean_p99 = res[lo] + frac * (res[hi] - res[lo]);
    o.poison_residual = (x0 - vk * (vk.transpose() * x0)).norm();
    o.is_outlier = o.poison_residual > o.clean_p99;
    Matrix xt(n + 1, p);
    xt.topRows(n) = data.x;
    xt.row(n) = x0.transpose();
    const double before = d.s(k - 1) * d.s(k - 1);
    const double after = std::pow(svd(xt).s(k - 1), 2);
    o.lambda_k_shift = (after - before) / before;
    return o;
}

}  // namespace projreg
