#pragma once

// Computable PCA-OLS risk bounds, spectral-gap checks, the oracle-PCR closed
// form and random-projection asymptotics.
//
// Notation: lambda_1 >= ... >= lambda_p are the eigenvalues of C_xx,
// lambda~_i those of (1/n) X^T X, and E = C_xx - (1/n) X^T X.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "projreg/data_model.hpp"
#include "projreg/estimators.hpp"
#include "projreg/numerics.hpp"
#include "projreg/risk.hpp"

namespace projreg {

struct BoundReport {
    // Absent when the bound is not defined by the theorem being evaluated.
    std::optional<double> bias_upper;
    std::optional<double> bias_lower;
    std::optional<double> var_upper;
    std::optional<double> var_lower;
    double probability = 0.0;  // may be <= 0 (vacuous), reported as is

    // Assumption outcomes; absent when the theorem does not use them.
    std::optional<bool> assumption1;
    std::optional<bool> assumption2;
    std::optional<bool> m_below_lambda_k;
    bool gap_violation = false;  // lambda_i == lambda_j inside a probability sum
    bool valid = true;

    Eigen::Index n = 0, p = 0, k = 0;
    double t = 0.0;
    double r0 = 0.0;
    std::optional<double> m_linear_t;
    std::optional<double> m_sqrt_t;
    std::optional<double> e_op;
    std::string note;
};

inline double effective_rank(const Vector& spectrum) {
    if (spectrum.size() == 0 || !(spectrum.maxCoeff() > 0.0)) fail(ErrorCode::ZeroSpectrum, "largest eigenvalue is not positive");
    return spectrum.sum() / spectrum.maxCoeff();
}

inline double effective_rank(const Matrix& cxx) {
    if (cxx.rows() != cxx.cols()) fail(ErrorCode::NotSymmetric, "covariance is not square");
    return effective_rank(Vector(eig_sym(cxx).values));
}

struct DeviationBound {
    double m_linear_t = 0.0;  // c lambda_1 max{sqrt(r0/n), r0/n, t/n}
    double m_sqrt_t = 0.0;    // c lambda_1 max{sqrt(r0/n), r0/n, sqrt(t/n)}
    double r0 = 0.0;
    double lambda1 = 0.0;
};

inline DeviationBound deviation_bound_M(const Vector& spectrum, Eigen::Index n, double t, double c) {
    const double nn = static_cast<double>(n);
    if (!(t > 1.0 && t < nn)) fail(ErrorCode::BadParams, "deviation bound needs 1 < t < n");
    if (!(c > 0.0)) fail(ErrorCode::BadParams, "constant c must be > 0");
    DeviationBound d;
    d.r0 = effective_rank(spectrum);
    d.lambda1 = spectrum.maxCoeff();
    const double a = std::sqrt(d.r0 / nn), b = d.r0 / nn;
    d.m_linear_t = c * d.lambda1 * std::max({a, b, t / nn});
    d.m_sqrt_t = c * d.lambda1 * std::max({a, b, std::sqrt(t / nn)});
    return d;
}

inline DeviationBound deviation_bound_M(const DataModel& model, Eigen::Index n, double t, double c) {
    return deviation_bound_M(model.spectral.values, n, t, c);
}

namespace detail {

inline double lambda_at(const Vector& l, Eigen::Index i) {  // 1-based, 0 past the end
    return i <= l.size() ? l(i - 1) : 0.0;
}

inline void require_bound_k(Eigen::Index k, Eigen::Index n, Eigen::Index p) {
    if (k < 1 || k > std::min(n, p))
        fail(ErrorCode::BadRank, "k=" + std::to_string(k) + " outside [1, min(n,p)=" + std::to_string(std::min(n, p)) + "]");
}

}  // namespace detail

/// Data-free bounds with the analytic deviation M (t/n variant). When
/// M >= lambda_k the variance upper bound is infinite and the report is
/// marked invalid rather than thrown.
inline BoundReport thm1_bounds(const DataModel& model, Eigen::Index n, Eigen::Index k, double t, double c = 1.0,
                               std::optional<double> pi_perp_beta_norm = std::nullopt) {
    const Vector& l = model.spectral.values;
    const Eigen::Index p = l.size();
    detail::require_bound_k(k, n, p);
    const DeviationBound dev = deviation_bound_M(model, n, t, c);
    const double m = dev.m_linear_t;
    const double s2n = model.noise_variance() / static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double l1 = l(0), lp = l(p - 1), lk = l(k - 1);

    BoundReport r;
    r.n = n;
    r.p = p;
    r.k = k;
    r.t = t;
    r.r0 = dev.r0;
    r.m_linear_t = dev.m_linear_t;
    r.m_sqrt_t = dev.m_sqrt_t;
    r.probability = 1.0 - std::exp(-t);
    r.m_below_lambda_k = m < lk;
    r.valid = *r.m_below_lambda_k;
    r.bias_upper = model.beta.squaredNorm() * (m + detail::lambda_at(l, k + 1));
    r.bias_lower = pi_perp_beta_norm ? std::optional(lp * *pi_perp_beta_norm * *pi_perp_beta_norm) : std::nullopt;
    r.var_lower = s2n * kk * lp / (l1 + m);
    r.var_upper = r.valid ? s2n * kk * l1 / (lk - m) : std::numeric_limits<double>::infinity();
    if (!r.valid) r.note = "M >= lambda_k";
    return r;
}

/// Same displays with ||E||_op measured on the data in place of M and the
/// realized ||Pi_perp beta|| in the bias lower bound.
inline BoundReport thm1_bounds_empirical(const DataModel& model, const Dataset& data, Eigen::Index k, double t = 3.0) {
    const Vector& l = model.spectral.values;
    const Eigen::Index p = l.size(), n = data.n();
    if (data.p() != p) fail(ErrorCode::BadSpec, "model and data dimensions differ");
    detail::require_bound_k(k, n, p);
    const double e = symmetric_operator_norm(model.cxx - data.x.transpose() * data.x / static_cast<double>(n));
    const Matrix vk = svd(data.x).v.leftCols(k);
    const Vector perp = model.beta - vk * (vk.transpose() * model.beta);
    const double s2n = model.noise_variance() / static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double l1 = l(0), lp = l(p - 1), lk = l(k - 1);

    BoundReport r;
    r.n = n;
    r.p = p;
    r.k = k;
    r.t = t;
    r.r0 = effective_rank(l);
    r.e_op = e;
    r.probability = 1.0;  // deterministic given the realized E
    r.m_below_lambda_k = e < lk;
    r.valid = *r.m_below_lambda_k;
    r.bias_upper = model.beta.squaredNorm() * (e + detail::lambda_at(l, k + 1));
    r.bias_lower = lp * perp.squaredNorm();
    r.var_lower = s2n * kk * lp / (l1 + e);
    r.var_upper = r.valid ? s2n * kk * l1 / (lk - e) : std::numeric_limits<double>::infinity();
    if (!r.valid) r.note = "||E||_op >= lambda_k";
    return r;
}

/// Distinct-eigenvalue clusters of a descending spectrum. Two eigenvalues
/// share a cluster when they differ by at most rel_tol * lambda_1.
struct SpectrumClusters {
    std::vector<int> label;      // cluster index of each eigenvalue
    std::vector<double> center;  // representative (first) value per cluster
};

inline SpectrumClusters cluster_spectrum(const Vector& l, double rel_tol = 1e-9) {
    SpectrumClusters c;
    const double tol = rel_tol * (l.size() ? std::abs(l(0)) : 0.0);
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        if (c.center.empty() || std::abs(c.center.back() - l(i)) > tol) c.center.push_back(l(i));
        c.label.push_back(static_cast<int>(c.center.size()) - 1);
    }
    return c;
}

struct GapCheck {
    bool assumption1 = false;
    bool assumption2 = false;
    double margin1 = 0.0;  // (1/4) min gbar_r - ||E||_op
    double margin2 = 0.0;  // min over (i,j) of the signed assumption2 slack
    double min_gap = 0.0;  // min_{r} gbar_r over clusters meeting the top k
    double e_op = 0.0;
    bool splits_cluster = false;  // lambda_k == lambda_{k+1}
};

/// Spectral-gap assumptions for the top-k eigenspace. Gaps are taken
/// between distinct-eigenvalue clusters. A top-k space that cuts through a
/// cluster has zero gap, and assumption2 pairs inside one cluster are
/// skipped (their sign factor is zero).
inline GapCheck check_gap_assumptions(const DataModel& model, const Dataset& data, Eigen::Index k, double cluster_tol = 1e-9) {
    const Vector& l = model.spectral.values;
    const Eigen::Index p = l.size(), n = data.n();
    if (data.p() != p) fail(ErrorCode::BadSpec, "model and data dimensions differ");
    if (k < 1 || k > p) fail(ErrorCode::BadRank, "k outside [1,p]");
    const Matrix emp = data.x.transpose() * data.x / static_cast<double>(n);
    GapCheck g;
    g.e_op = symmetric_operator_norm(model.cxx - emp);
    const Vector lt = eig_sym(emp).values;
    const SpectrumClusters cl = cluster_spectrum(l, cluster_tol);
    const auto nclusters = static_cast<int>(cl.center.size());

    const int last = cl.label[static_cast<std::size_t>(k - 1)];
    g.splits_cluster = k < p && cl.label[static_cast<std::size_t>(k)] == last;
    auto gap_below = [&](int r) {  // g_r = mu_r - mu_{r+1}; the bottom cluster is measured against 0
        return r + 1 < nclusters ? cl.center[static_cast<std::size_t>(r)] - cl.center[static_cast<std::size_t>(r + 1)]
                                 : cl.center[static_cast<std::size_t>(r)];
    };
    double min_gap = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= last; ++r) {
        double gbar = gap_below(r);
        if (r > 0) gbar = std::min(gbar, gap_below(r - 1));
        min_gap = std::min(min_gap, gbar);
    }
    if (g.splits_cluster) min_gap = 0.0;
    g.min_gap = min_gap;
    g.margin1 = 0.25 * min_gap - g.e_op;
    g.assumption1 = g.margin1 > 0.0;

    double m2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j == i || cl.label[static_cast<std::size_t>(i)] == cl.label[static_cast<std::size_t>(j)]) continue;
            const double sgn = l(i) > l(j) ? 1.0 : -1.0;
            m2 = std::min(m2, sgn * (2.0 * lt(i) - l(i) - l(j)));
        }
    g.margin2 = std::isfinite(m2) ? m2 : 0.0;
    g.assumption2 = !g.splits_cluster && m2 > 0.0;
    return g;
}

namespace detail {

// 1 - sum_{i<=k} sum_{j!=i} 4 w_ij k_j^2 / (n t (l_i - l_j)^2), with the
// weight supplied by the caller. Returns nullopt on a tie.
template <typename Weight>
std::optional<double> gap_probability(const Vector& l, Eigen::Index k, Eigen::Index n, double t, Weight w) {
    const double tr = l.sum();
    const double nt = static_cast<double>(n) * t;
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < l.size(); ++j) {
            if (j == i) continue;
            const double d = l(i) - l(j);
            if (d == 0.0) return std::nullopt;
            const double kj2 = l(j) * (l(j) + tr);
            s += 4.0 * w(i, j) * kj2 / (nt * d * d);
        }
    return 1.0 - s;
}

}  // namespace detail

/// Gap-dependent variance bounds with w_ij = lambda_j / lambda~_i evaluated at
/// the realized empirical spectrum. The lower bound drops the o(1/n)
/// correction. A tie lambda_i == lambda_j sets gap_violation and leaves the
/// probability NaN.
inline BoundReport thm2_var_bounds(const DataModel& model, const Dataset& data, Eigen::Index k, double t) {
    const Vector& l = model.spectral.values;
    const Eigen::Index p = l.size(), n = data.n();
    if (data.p() != p) fail(ErrorCode::BadSpec, "model and data dimensions differ");
    detail::require_bound_k(k, n, p);
    if (!(t > 0.0)) fail(ErrorCode::BadParams, "t must be > 0");
    const GapCheck gc = check_gap_assumptions(model, data, k);
    const Vector lt = eig_sym(data.x.transpose() * data.x / static_cast<double>(n)).values;
    const double e = gc.e_op;
    const double s2n = model.noise_variance() / static_cast<double>(n);

    BoundReport r;
    r.n = n;
    r.p = p;
    r.k = k;
    r.t = t;
    r.r0 = effective_rank(l);
    r.e_op = e;
    r.assumption1 = gc.assumption1;
    r.assumption2 = gc.assumption2;
    r.valid = gc.assumption1 && gc.assumption2;
    const auto prob = detail::gap_probability(l, k, n, t, [&](Eigen::Index i, Eigen::Index j) { return l(j) / lt(i); });
    r.gap_violation = !prob;
    r.probability = prob ? *prob : std::numeric_limits<double>::quiet_NaN();

    double up = 0.0, lo = 0.0;
    bool lo_ok = true;
    for (Eigen::Index i = 0; i < k; ++i) {
        up += l(i) / (l(i) + e) + t;
        if (l(i) > e)
            lo += l(i) / (l(i) - e);
        else
            lo_ok = false;
    }
    r.var_upper = s2n * up;
    if (lo_ok) r.var_lower = s2n * lo;
    r.note = "lower bound omits the o(1/n) correction";
    return r;
}

/// Expected-bias lower bound sum_{i>k} lambda_i - k t for isotropic random
/// beta (E[beta beta^T] = I); data-free.
inline BoundReport thm3_bias_lower(const DataModel& model, Eigen::Index n, Eigen::Index k, double t) {
    const Vector& l = model.spectral.values;
    const Eigen::Index p = l.size();
    if (k < 1 || k > p) fail(ErrorCode::BadRank, "k outside [1,p]");
    if (!(t > 0.0)) fail(ErrorCode::BadParams, "t must be > 0");
    BoundReport r;
    r.n = n;
    r.p = p;
    r.k = k;
    r.t = t;
    r.r0 = effective_rank(l);
    r.bias_lower = l.tail(p - k).sum() - static_cast<double>(k) * t;
    const auto prob = detail::gap_probability(l, k, n, t, [&](Eigen::Index, Eigen::Index j) { return l(j); });
    r.gap_violation = !prob;
    r.probability = prob ? *prob : std::numeric_limits<double>::quiet_NaN();
    r.valid = !r.gap_violation;
    return r;
}

/// Conditional oracle-PCR risk in the population eigenbasis. With
/// X_k = X U_k, b = U^T beta and Lambda_k the top-k eigenvalues:
///   truncation = sum_{i>k} b_i^2 lambda_i
///   leakage    = e^T Lambda_k e,  e = b_k - X_k^+ X b
///   variance   = (sigma^2/n) tr(((1/n) X_k^T X_k)^+ Lambda_k)
/// leakage vanishes when the discarded directions carry no signal.
struct OraclePcrRisk {
    RiskReport report;
    double truncation_bias = 0.0;
    double leakage_bias = 0.0;
    Vector truncated_spectrum;  // eigenvalues of (1/n) X_k^T X_k, descending
};

inline OraclePcrRisk oracle_pcr_exact_risk(const DataModel& model, const Dataset& data, Eigen::Index k,
                                           double rank_tol = kDefaultRankTol) {
    const Eigen::Index p = model.dim();
    if (data.p() != p) fail(ErrorCode::BadSpec, "model and data dimensions differ");
    if (k < 1 || k > p) fail(ErrorCode::BadRank, "k outside [1,p]");
    const double n = static_cast<double>(data.n());
    const Matrix& u = model.spectral.vectors;
    const Vector& l = model.spectral.values;
    const Vector b = u.transpose() * model.beta;
    const Matrix xk = data.x * u.leftCols(k);

    OraclePcrRisk out;
    for (Eigen::Index i = k; i < p; ++i) out.truncation_bias += b(i) * b(i) * l(i);
    const Vector e = b.head(k) - pseudo_inverse(xk, rank_tol) * (data.x * model.beta);
    out.leakage_bias = e.dot(l.head(k).asDiagonal() * e);

    out.truncated_spectrum = eig_sym(xk.transpose() * xk / n).values;
    // pseudo-inverse through the SVD of X_k, same cutoff as pseudo_inverse
    const SvdDecomposition sv = svd(xk);
    const double cut = rank_tol * (sv.s.size() ? sv.s(0) : 0.0);
    double tr = 0.0;
    for (Eigen::Index i = 0; i < sv.s.size(); ++i) {
        if (!(sv.s(i) > cut)) continue;
        const Vector vi = sv.v.col(i);
        tr += n * vi.dot(l.head(k).asDiagonal() * vi) / (sv.s(i) * sv.s(i));
    }
    RiskReport& r = out.report;
    r.method = Method::oracle_pcr;
    r.noise = model.noise_variance();
    r.bias_sq = out.truncation_bias + out.leakage_bias;
    r.variance = model.noise_variance() / n * tr;
    r.total = r.bias_sq + r.variance + r.noise;
    r.trials = 1;
    return out;
}

/// max_i (lambda~'_i - lambda~_i) over i <= k, where lambda~' are the
/// eigenvalues of (1/n) X_k^T X_k (oracle columns) and lambda~ those of
/// (1/n) X^T X. Interlacing says this is <= 0.
inline double interlacing_excess(const DataModel& model, const Dataset& data, Eigen::Index k) {
    const double n = static_cast<double>(data.n());
    const Matrix xk = data.x * model.spectral.vectors.leftCols(k);
    const Vector lk = eig_sym(xk.transpose() * xk / n).values;
    const Vector lt = eig_sym(data.x.transpose() * data.x / n).values;
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) worst = std::max(worst, lk(i) - lt(i));
    return worst;
}

/// Limiting excess risk E[(x^T(beta_hat - beta))^2] of OLS on a Gaussian
/// random projection to k = gamma2 n features, with p = gamma1 n, isotropic
/// features and ||beta||^2 = r_sq. Add sigma_sq for the test MSE.
inline double gaussian_projection_asymptotic_risk(double r_sq, double sigma_sq, double gamma1, double gamma2) {
    if (!(gamma1 > 0.0 && gamma2 > 0.0)) fail(ErrorCode::BadParams, "gamma1, gamma2 must be > 0");
    if (!(r_sq >= 0.0 && sigma_sq >= 0.0)) fail(ErrorCode::BadParams, "r^2 and sigma^2 must be >= 0");
    const double d2 = std::abs(gamma2 - 1.0);
    if (d2 < 1e-9) fail(ErrorCode::AtInterpolation, "gamma2 = 1");
    if (gamma2 < 1.0) return (gamma1 - gamma2) / (gamma1 * d2) * r_sq + gamma2 / d2 * sigma_sq;
    const double d1 = std::abs(gamma1 - 1.0);
    if (d1 < 1e-9) fail(ErrorCode::AtInterpolation, "gamma1 = 1 with gamma2 > 1");
    return gamma2 * d1 / (gamma1 * d2) * r_sq + (d1 + d2) / (d1 * d2) * sigma_sq;
}

/// Limiting excess risk of min-norm OLS with p = gamma n isotropic features.
inline double min_norm_ols_asymptotic_risk(double r_sq, double sigma_sq, double gamma) {
    if (!(gamma > 0.0)) fail(ErrorCode::BadParams, "gamma must be > 0");
    const double d = std::abs(gamma - 1.0);
    if (d < 1e-9) fail(ErrorCode::AtInterpolation, "gamma = 1");
    if (gamma < 1.0) return sigma_sq * gamma / d;
    return d / gamma * r_sq + sigma_sq / d;
}

}  // namespace projreg
