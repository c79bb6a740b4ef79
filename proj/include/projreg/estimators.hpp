#pragma once

// Projection-based linear regression estimators. Every estimator returns a
// coefficient vector in the ambient p-dimensional space; estimators that are
// linear in Y also return the resolvent A with beta_hat = A * Y, which is what
// makes exact conditional risk computable.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "projreg/data_model.hpp"
#include "projreg/error.hpp"
#include "projreg/numerics.hpp"
#include "projreg/rng.hpp"

namespace projreg {

enum class Method {
    ols,
    ridge,
    ridge_cv,
    pca_ols,
    oracle_pcr,
    pls,
    gaussian_proj,
    ortho_proj,
    ortho_ridge,
    generative,
    null,
    truth,
};

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::ols: return "ols";
    case Method::ridge: return "ridge";
    case Method::ridge_cv: return "ridge_cv";
    case Method::pca_ols: return "pca_ols";
    case Method::oracle_pcr: return "oracle_pcr";
    case Method::pls: return "pls";
    case Method::gaussian_proj: return "gaussian_proj";
    case Method::ortho_proj: return "ortho_proj";
    case Method::ortho_ridge: return "ortho_ridge";
    case Method::generative: return "generative";
    case Method::null: return "null";
    case Method::truth: return "truth";
    }
    return "?";
}

inline std::optional<Method> method_from_string(std::string_view s) {
    for (Method m : {Method::ols, Method::ridge, Method::ridge_cv, Method::pca_ols, Method::oracle_pcr, Method::pls,
                     Method::gaussian_proj, Method::ortho_proj, Method::ortho_ridge, Method::generative, Method::null,
                     Method::truth})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

struct FitDiagnostics {
    int iterations = 0;
    bool converged = true;
    bool krylov_breakdown = false;
    Eigen::Index effective_k = 0;
    std::vector<double> cv_scores;
    std::vector<double> objective_history;
    double constraint_residual = 0.0;
};

struct FitResult {
    Vector beta_hat;
    std::optional<Matrix> resolvent;  // p x n, beta_hat = A * Y
    Method method = Method::ols;
    std::optional<Eigen::Index> k;
    std::optional<double> lambda;
    bool constant = false;  // beta_hat does not depend on the data at all
    FitDiagnostics diagnostics;

    bool linear_in_y() const { return constant || resolvent.has_value(); }
};

enum class Provenance { pca, oracle, gaussian, orthogonal, krylov };

struct ProjectionMatrix {
    Matrix pi;  // p x k
    Provenance provenance = Provenance::orthogonal;
};

namespace detail {

inline void require_data(const Dataset& d) {
    if (d.x.rows() != d.y.size()) fail(ErrorCode::BadSpec, "x rows must equal len(y)");
    if (d.x.size() == 0) fail(ErrorCode::BadSpec, "empty design");
    require_finite(d.x, "X");
    require_finite(d.y, "Y");
}

inline FitResult linear_fit(Matrix a, const Vector& y, Method m) {
    FitResult f;
    f.beta_hat = a * y;
    f.resolvent = std::move(a);
    f.method = m;
    return f;
}

// A = V diag(s / (s^2 + n lambda)) U^T from a thin SVD.
inline Matrix ridge_resolvent(const SvdDecomposition& d, double n_lambda) {
    const Vector w = d.s.array() / (d.s.array().square() + n_lambda);
    return d.v * w.asDiagonal() * d.u.transpose();
}

}  // namespace detail

/// Min-norm least squares beta = X^+ Y (both the p < n and p > n formulas).
inline FitResult fit_ols(const Dataset& data, double rank_tol = kDefaultRankTol) {
    detail::require_data(data);
    FitResult f = detail::linear_fit(pseudo_inverse(data.x, rank_tol), data.y, Method::ols);
    f.diagnostics.effective_k = numerical_rank(data.x, rank_tol);
    return f;
}

/// argmin ||X b - Y||^2 + n lambda ||b||^2, solved through the SVD of X.
inline FitResult fit_ridge(const Dataset& data, double lambda, double rank_tol = kDefaultRankTol) {
    detail::require_data(data);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::BadParams, "ridge lambda must be >= 0");
    const SvdDecomposition d = svd(data.x);
    if (lambda == 0.0 && (data.p() > data.n() || d.rank(rank_tol) < data.p()))
        fail(ErrorCode::Singular, "lambda = 0 with rank-deficient X^T X");
    const double n_lambda = static_cast<double>(data.n()) * lambda;
    FitResult f = lambda == 0.0 ? detail::linear_fit(pseudo_inverse(d, rank_tol), data.y, Method::ridge)
                                : detail::linear_fit(detail::ridge_resolvent(d, n_lambda), data.y, Method::ridge);
    f.lambda = lambda;
    return f;
}

struct RidgeSelection {
    double lambda = 0.0;
    FitResult fit;
    std::vector<double> scores;  // LOO residual sum of squares per grid entry (inf = degenerate)
};

/// Leave-one-out residuals e_i / (1 - H_ii) for a fixed total penalty n*lambda.
/// Returns nullopt when some 1 - H_ii < 1e-12.
inline std::optional<Vector> loo_residuals(const Dataset& data, const SvdDecomposition& d, double lambda) {
    const double n_lambda = static_cast<double>(data.n()) * lambda;
    const Vector shrink = lambda == 0.0 ? Vector::Ones(d.rank()) : Vector(d.s.array().square() / (d.s.array().square() + n_lambda));
    const Matrix u = d.u.leftCols(shrink.size());
    const Vector fitted = u * (shrink.asDiagonal() * (u.transpose() * data.y));
    const Vector h_diag = u.array().square().matrix() * shrink;
    Vector loo(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double denom = 1.0 - h_diag(i);
        if (denom < 1e-12) return std::nullopt;
        loo(i) = (data.y(i) - fitted(i)) / denom;
    }
    return loo;
}

/// Grid argmin of the leave-one-out residual sum via the hat-matrix shortcut;
/// ties go to the larger lambda. Grid points whose hat matrix is degenerate
/// score +inf; if every point is degenerate the selection fails.
inline RidgeSelection select_ridge_loocv(const Dataset& data, const std::vector<double>& grid) {
    detail::require_data(data);
    if (grid.empty()) fail(ErrorCode::BadParams, "ridge grid is empty");
    for (double l : grid)
        if (!(l >= 0.0) || !std::isfinite(l)) fail(ErrorCode::BadParams, "ridge grid entries must be >= 0");
    const SvdDecomposition d = svd(data.x);
    RidgeSelection sel;
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> best_lambda;
    for (double l : grid) {
        double score = std::numeric_limits<double>::infinity();
        if (auto loo = loo_residuals(data, d, l)) score = loo->squaredNorm();
        sel.scores.push_back(score);
        if (!std::isfinite(score)) continue;
        if (!best_lambda || score < best || (score == best && l > *best_lambda)) {
            best = score;
            best_lambda = l;
        }
    }
    if (!best_lambda) fail(ErrorCode::DegenerateHat, "1 - H_ii < 1e-12 for every grid lambda");
    sel.lambda = *best_lambda;
    sel.fit = fit_ridge(data, sel.lambda);
    sel.fit.method = Method::ridge_cv;
    sel.fit.diagnostics.cv_scores = sel.scores;
    return sel;
}

/// Log-spaced grid lo..hi (inclusive) with `count` points.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        g.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
    }
    return g;
}

namespace detail {

inline void require_k(Eigen::Index k, Eigen::Index kmax, const char* who) {
    if (k < 1 || k > kmax)
        fail(ErrorCode::BadRank, std::string(who) + ": k=" + std::to_string(k) + " outside [1," + std::to_string(kmax) + "]");
}

}  // namespace detail

/// Top-k right singular vectors of X (empirical principal directions).
inline ProjectionMatrix pca_projection(const Dataset& data, Eigen::Index k) {
    detail::require_data(data);
    detail::require_k(k, std::min(data.n(), data.p()), "pca_projection");
    return {svd(data.x).v.leftCols(k), Provenance::pca};
}

/// Top-k population eigenvectors of C_xx.
inline ProjectionMatrix oracle_projection(const DataModel& model, Eigen::Index k) {
    detail::require_k(k, model.dim(), "oracle_projection");
    return {model.spectral.vectors.leftCols(k), Provenance::oracle};
}

/// beta = X_k^+ Y with X_k the rank-k truncated SVD of X.
inline FitResult fit_pca_ols(const Dataset& data, Eigen::Index k, double rank_tol = kDefaultRankTol) {
    detail::require_data(data);
    detail::require_k(k, std::min(data.n(), data.p()), "fit_pca_ols");
    SvdDecomposition d = svd(data.x);
    SvdDecomposition top{d.u.leftCols(k), d.s.head(k), d.v.leftCols(k)};
    FitResult f = detail::linear_fit(pseudo_inverse(top, rank_tol), data.y, Method::pca_ols);
    f.k = k;
    f.diagnostics.effective_k = top.rank(rank_tol);
    return f;
}

/// beta = Pi (X Pi)^+ Y, or Pi times the ridge solution on X Pi (penalty n*lambda
/// on the projected coefficients).
inline FitResult fit_projected(const Dataset& data, const ProjectionMatrix& proj, std::optional<double> ridge = std::nullopt,
                               double rank_tol = kDefaultRankTol) {
    detail::require_data(data);
    if (proj.pi.rows() != data.p() || proj.pi.cols() < 1) fail(ErrorCode::BadRank, "projection must be p x k with k >= 1");
    const Matrix z = data.x * proj.pi;
    const SvdDecomposition d = svd(z);
    Matrix coef;
    if (ridge && *ridge > 0.0)
        coef = detail::ridge_resolvent(d, static_cast<double>(data.n()) * *ridge);
    else
        coef = pseudo_inverse(d, rank_tol);
    FitResult f = detail::linear_fit(proj.pi * coef, data.y, Method::ortho_proj);
    f.k = proj.pi.cols();
    if (ridge) f.lambda = *ridge;
    f.diagnostics.effective_k = d.rank(rank_tol);
    return f;
}

/// Projection onto the top-k population eigenvectors (column truncation when
/// C_xx is diagonal with descending entries).
inline FitResult fit_oracle_pcr(const Dataset& data, const DataModel& model, Eigen::Index k,
                                double rank_tol = kDefaultRankTol) {
    if (model.dim() != data.p()) fail(ErrorCode::BadSpec, "model and data dimensions differ");
    FitResult f = fit_projected(data, oracle_projection(model, k), std::nullopt, rank_tol);
    f.method = Method::oracle_pcr;
    return f;
}

enum class RandomProjectionKind { gaussian, orthogonal };

/// Gaussian: entries i.i.d. N(0, 1/p). Orthogonal: Haar-distributed with
/// Pi^T Pi = I_k for k <= p, or Pi Pi^T = I_p for k > p.
inline ProjectionMatrix random_projection(RandomProjectionKind kind, Eigen::Index p, Eigen::Index k, std::uint64_t seed) {
    if (k < 1 || p < 1) fail(ErrorCode::BadRank, "random projection needs p, k >= 1");
    Rng rng(derive_seed(seed, {0x9A0Fu}));
    if (kind == RandomProjectionKind::gaussian) {
        Matrix pi(p, k);
        const double scale = 1.0 / std::sqrt(static_cast<double>(p));
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < k; ++j) pi(i, j) = scale * rng.normal();
        return {pi, Provenance::gaussian};
    }
    const Eigen::Index rows = std::max(p, k), cols = std::min(p, k);
    Matrix g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < cols; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    if (k <= p) return {q, Provenance::orthogonal};
    return {q.transpose(), Provenance::orthogonal};
}

inline FitResult fit_random_projection(const Dataset& data, RandomProjectionKind kind, Eigen::Index k, std::uint64_t seed,
                                       std::optional<double> ridge = std::nullopt) {
    detail::require_data(data);
    FitResult f = fit_projected(data, random_projection(kind, data.p(), k, seed), ridge);
    if (kind == RandomProjectionKind::gaussian)
        f.method = Method::gaussian_proj;
    else
        f.method = ridge ? Method::ortho_ridge : Method::ortho_proj;
    return f;
}

/// Ridge on the projected design X Pi with lambda chosen by LOOCV there.
inline FitResult fit_projected_ridge_cv(const Dataset& data, const ProjectionMatrix& proj, const std::vector<double>& grid) {
    detail::require_data(data);
    Dataset reduced{data.x * proj.pi, data.y, data.seed, nullptr};
    RidgeSelection sel = select_ridge_loocv(reduced, grid);
    FitResult f = fit_projected(data, proj, sel.lambda);
    f.method = Method::ortho_ridge;
    f.diagnostics.cv_scores = std::move(sel.scores);
    return f;
}

struct KrylovBasis {
    Matrix basis;  // p x k_eff, orthonormal columns
    bool breakdown = false;
};

/// Orthonormal basis of span{s, A s, ..., A^{k-1} s}, s = X^T Y, A = X^T X,
/// built Lanczos-style with two passes of modified Gram-Schmidt.
inline KrylovBasis krylov_basis(const Dataset& data, Eigen::Index k) {
    const Vector s = data.x.transpose() * data.y;
    const double s_norm = s.norm();
    if (!(s_norm > 0.0)) fail(ErrorCode::BadParams, "X^T Y is zero; Krylov space is empty");
    const double a_norm = std::pow(operator_norm(data.x), 2);
    Matrix q(data.p(), k);
    q.col(0) = s / s_norm;
    Eigen::Index built = 1;
    bool breakdown = false;
    while (built < k) {
        Vector w = data.x.transpose() * (data.x * q.col(built - 1));
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < built; ++j) w -= q.col(j).dot(w) * q.col(j);
        const double wn = w.norm();
        if (wn <= 1e-12 * a_norm) {
            breakdown = true;
            break;
        }
        q.col(built++) = w / wn;
    }
    return {q.leftCols(built), breakdown};
}

/// Partial least squares (univariate Y): OLS on the Krylov projection.
/// Not linear in Y, so no resolvent. If the Krylov space has dimension
/// below k the fit uses the available dimension and flags the breakdown.
inline FitResult fit_pls(const Dataset& data, Eigen::Index k, double rank_tol = kDefaultRankTol) {
    detail::require_data(data);
    detail::require_k(k, std::min(data.n(), data.p()), "fit_pls");
    KrylovBasis kb = krylov_basis(data, k);
    const Matrix z = data.x * kb.basis;
    FitResult f;
    f.beta_hat = kb.basis * (pseudo_inverse(z, rank_tol) * data.y);
    f.method = Method::pls;
    f.k = k;
    f.diagnostics.krylov_breakdown = kb.breakdown;
    f.diagnostics.effective_k = kb.basis.cols();
    return f;
}

struct GenerativeOptions {
    int max_iters = 500;
    double tol = 1e-8;          // relative objective decrease
    bool constrained = true;    // false drops Z P = Y (diagnostic mode)
    std::optional<std::uint64_t> init_seed;  // random start instead of PCA scores
    double rank_tol = kDefaultRankTol;
};

namespace detail {

// Orthonormal basis of the complement of span{P} in R^k (k x (k-1)).
inline Matrix complement_basis(const Vector& p) {
    const Eigen::Index k = p.size();
    const Matrix col = p;
    Eigen::HouseholderQR<Matrix> qr(col);
    const Matrix full = qr.householderQ() * Matrix::Identity(k, k);
    return full.rightCols(k - 1);
}

}  // namespace detail

/// Latent-variable regression: minimize ||X - Z Q||_F^2 subject to Z P = Y
/// by alternating exact minimization over Q (Q = Z^+ X) and Z (row-wise
/// equality-constrained least squares, solved on the affine set Z P = Y).
/// The coefficient is beta = Q^+ P, since x = Q^T z and y = P^T z give
/// y = x^T Q^+ P.
inline FitResult fit_generative(const Dataset& data, Eigen::Index k, std::optional<Vector> p_vec = std::nullopt,
                                const GenerativeOptions& opts = {}) {
    detail::require_data(data);
    if (k < 1) fail(ErrorCode::BadRank, "generative model needs k >= 1");
    Vector pv = p_vec ? *p_vec : Vector(Vector::Unit(k, 0));
    if (pv.size() != k || !(pv.norm() > 0.0)) fail(ErrorCode::BadParams, "P must be a nonzero length-k vector");
    const Eigen::Index n = data.n();
    const Matrix& x = data.x;
    const Vector& y = data.y;
    const double p_sq = pv.squaredNorm();
    const Matrix comp = detail::complement_basis(pv);
    const Matrix z0 = y * (pv / p_sq).transpose();  // minimal-norm rows with z^T P = y

    auto project_to_constraint = [&](Matrix& z) { z += (y - z * pv) * (pv / p_sq).transpose(); };

    Matrix z;
    if (opts.init_seed) {
        Rng rng(derive_seed(*opts.init_seed, {0x6E4u}));
        z.resize(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < k; ++j) z(i, j) = rng.normal();
    } else {
        const SvdDecomposition d = svd(x);
        const Eigen::Index avail = std::min(k, d.s.size());
        z = Matrix::Zero(n, k);
        z.leftCols(avail) = d.u.leftCols(avail) * d.s.head(avail).asDiagonal();
    }
    if (opts.constrained) project_to_constraint(z);

    const Eigen::Index needed_rank = std::min(n, k);
    auto check_rank = [&](const Matrix& zz) {
        if (numerical_rank(zz, opts.rank_tol) < needed_rank)
            fail(ErrorCode::DegenerateLatent, "latent matrix Z lost rank below min(n,k)=" + std::to_string(needed_rank));
    };

    FitResult f;
    f.method = Method::generative;
    f.k = k;
    check_rank(z);
    Matrix q = pseudo_inverse(z, opts.rank_tol) * x;
    double obj = (x - z * q).squaredNorm();
    f.diagnostics.objective_history.push_back(obj);
    f.diagnostics.converged = false;
    int it = 0;
    while (it < opts.max_iters) {
        ++it;
        if (opts.constrained) {
            if (k == 1) {
                z = z0;
            } else {
                const Matrix r = x - z0 * q;
                const Matrix b = comp.transpose() * q;
                z = z0 + (r * pseudo_inverse(b, opts.rank_tol)) * comp.transpose();
            }
        } else {
            z = x * pseudo_inverse(q, opts.rank_tol);
        }
        check_rank(z);
        q = pseudo_inverse(z, opts.rank_tol) * x;
        const double next = (x - z * q).squaredNorm();
        f.diagnostics.objective_history.push_back(next);
        const double prev = obj;
        obj = next;
        if (prev - next <= opts.tol * std::max(prev, 1e-300)) {
            f.diagnostics.converged = true;
            break;
        }
    }
    f.diagnostics.iterations = it;
    f.diagnostics.constraint_residual = opts.constrained ? (z * pv - y).cwiseAbs().maxCoeff() : 0.0;
    f.diagnostics.effective_k = numerical_rank(q, opts.rank_tol);
    f.beta_hat = pseudo_inverse(q, opts.rank_tol) * pv;
    return f;
}

/// Objective ||X - Z Q||_F^2 reached by a generative fit (last history entry).
inline double generative_objective(const FitResult& f) {
    return f.diagnostics.objective_history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                   : f.diagnostics.objective_history.back();
}

/// The null estimator (beta = 0) and the true coefficient (beta = model.beta).
inline std::pair<FitResult, FitResult> null_and_truth_baselines(const DataModel& model) {
    FitResult null_fit;
    null_fit.beta_hat = Vector::Zero(model.dim());
    null_fit.method = Method::null;
    null_fit.constant = true;
    FitResult truth_fit;
    truth_fit.beta_hat = model.beta;
    truth_fit.method = Method::truth;
    truth_fit.constant = true;
    return {std::move(null_fit), std::move(truth_fit)};
}

}  // namespace projreg
