#pragma once

// Conditional risk of linear-in-Y estimators and Monte Carlo out-of-sample MSE.
//
// For beta_hat = A Y with Y = X beta + eps, conditional on X:
//   bias^2   = (beta - A X beta)^T C_xx (beta - A X beta)
//   variance = sigma^2 tr(A^T C_xx A)
//   risk     = bias^2 + variance + sigma^2

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "projreg/data_model.hpp"
#include "projreg/estimators.hpp"
#include "projreg/numerics.hpp"
#include "projreg/rng.hpp"

namespace projreg {

enum class RiskMode { exact, monte_carlo };

struct RiskReport {
    double bias_sq = 0.0;
    double variance = 0.0;
    double noise = 0.0;
    double total = 0.0;
    Method method = Method::ols;
    RiskMode mode = RiskMode::exact;
    std::optional<double> mc_stderr;
    int trials = 0;
    int failed_trials = 0;
    // Monte Carlo mode: mean exact conditional risk over the same training
    // sets, when every successful trial had a resolvent.
    std::optional<double> exact_total_mean;
};

/// Exact conditional risk from the resolvent (or the constant map for baselines).
inline RiskReport exact_conditional_risk(const FitResult& fit, const DataModel& model, const Dataset& data) {
    RiskReport r;
    r.method = fit.method;
    r.mode = RiskMode::exact;
    r.noise = model.noise_variance();
    if (fit.constant) {
        const Vector diff = model.beta - fit.beta_hat;
        r.bias_sq = diff.dot(model.cxx * diff);
        r.variance = 0.0;
    } else {
        if (!fit.resolvent) fail(ErrorCode::NoResolvent, std::string(to_string(fit.method)) + " is not linear in Y");
        const Matrix& a = *fit.resolvent;
        if (a.rows() != model.dim() || a.cols() != data.n()) fail(ErrorCode::BadSpec, "resolvent shape mismatch");
        const Vector diff = model.beta - a * (data.x * model.beta);
        r.bias_sq = diff.dot(model.cxx * diff);
        r.variance = model.noise_variance() * (model.cxx * a).cwiseProduct(a).sum();
    }
    r.total = r.bias_sq + r.variance + r.noise;
    r.trials = 1;
    return r;
}

/// PCA-OLS risk in projector form:
///   beta^T P_perp C P_perp beta + (sigma^2/n) tr(((1/n) X_k^T X_k)^+ C) + sigma^2
/// with P_perp = I - V_k V_k^T. Independent of the resolvent route.
inline RiskReport pca_ols_projector_risk(const DataModel& model, const Dataset& data, Eigen::Index k) {
    const Matrix xk = rank_k_approx(data.x, k);
    const Matrix vk = svd(data.x).v.leftCols(k);
    const Eigen::Index p = data.p();
    const double n = static_cast<double>(data.n());
    const Matrix perp = Matrix::Identity(p, p) - vk * vk.transpose();
    RiskReport r;
    r.method = Method::pca_ols;
    r.noise = model.noise_variance();
    const Vector pb = perp * model.beta;
    r.bias_sq = pb.dot(model.cxx * pb);
    const Matrix gram = xk.transpose() * xk / n;
    r.variance = model.noise_variance() / n * (pseudo_inverse(gram, 1e-10) * model.cxx).trace();
    r.total = r.bias_sq + r.variance + r.noise;
    return r;
}

/// Bias/variance of beta = Pi (X Pi)^+ Y. The bias operator I - M X with
/// M = Pi (X Pi)^+ is checked to be idempotent (M X is an oblique projector
/// onto the fitted subspace); `projector_residual` reports ||(MX)^2 - MX||_max.
struct ProjectionSplit {
    RiskReport report;
    double projector_residual = 0.0;
};

inline ProjectionSplit projection_bias_variance_split(const ProjectionMatrix& proj, const Dataset& data,
                                                      const DataModel& model, double rank_tol = kDefaultRankTol) {
    if (proj.pi.cols() < 1 || proj.pi.rows() != data.p()) fail(ErrorCode::BadRank, "projection must be p x k, k >= 1");
    const Matrix m = proj.pi * pseudo_inverse(data.x * proj.pi, rank_tol);
    const Matrix mx = m * data.x;
    ProjectionSplit out;
    out.projector_residual = (mx * mx - mx).cwiseAbs().maxCoeff();
    const Vector b = model.beta - mx * model.beta;
    RiskReport& r = out.report;
    r.method = proj.provenance == Provenance::pca ? Method::pca_ols : Method::ortho_proj;
    r.noise = model.noise_variance();
    r.bias_sq = b.dot(model.cxx * b);
    r.variance = model.noise_variance() * (model.cxx * m).cwiseProduct(m).sum();
    r.total = r.bias_sq + r.variance + r.noise;
    return out;
}

/// Mean squared prediction error of beta_hat on a test set.
inline double test_mse(const Vector& beta_hat, const Dataset& test) {
    return (test.x * beta_hat - test.y).squaredNorm() / static_cast<double>(test.n());
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware).
/// Each index writes only its own output slot, so the result is independent
/// of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
}

struct MonteCarloOptions {
    int trials = 16;      // T
    Eigen::Index n_test = 256;
    unsigned workers = 1;
    int draws = 1;  // method-seed draws per trial (random projections), averaged
};

/// Training set for trial t under master seed s: sample(model, n, derive_seed(s, {t, 0})).
/// Test set: derive_seed(s, {t, 1}). Methods evaluated with the same master
/// seed therefore see identical data (common random numbers).
inline std::uint64_t trial_train_seed(std::uint64_t seed, int t) { return derive_seed(seed, {static_cast<std::uint64_t>(t), 0}); }
inline std::uint64_t trial_test_seed(std::uint64_t seed, int t) { return derive_seed(seed, {static_cast<std::uint64_t>(t), 1}); }
inline std::uint64_t trial_method_seed(std::uint64_t seed, int t) { return derive_seed(seed, {static_cast<std::uint64_t>(t), 2}); }

using FitFactory = std::function<FitResult(const Dataset& train, std::uint64_t trial_seed)>;

/// MSE = (1/T) sum_t (1/n_test) sum_i (x_i^T beta_t - y_i)^2 over fresh
/// training and test draws. Trials whose fit throws a projreg::Error are
/// excluded and counted in failed_trials. bias_sq / variance hold the mean
/// exact components when every successful fit is linear in Y.
inline RiskReport monte_carlo_mse(const FitFactory& factory, const std::shared_ptr<const DataModel>& model, Eigen::Index n_train,
                                  std::uint64_t seed, const MonteCarloOptions& opts = {}) {
    if (opts.trials < 1 || opts.n_test < 1 || opts.draws < 1)
        fail(ErrorCode::BadParams, "monte_carlo_mse needs T >= 1, n_test >= 1 and draws >= 1");
    struct Slot {
        bool ok = false;
        double mse = 0.0;
        std::optional<RiskReport> exact;
        Method method = Method::ols;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(opts.trials));
    parallel_for(slots.size(), opts.workers, [&](std::size_t i) {
        const int t = static_cast<int>(i);
        Slot& s = slots[i];
        try {
            const Dataset train = sample(model, n_train, trial_train_seed(seed, t));
            const Dataset test = sample(model, opts.n_test, trial_test_seed(seed, t));
            const std::uint64_t ms = trial_method_seed(seed, t);
            bool linear = true;
            RiskReport acc;
            for (int w = 0; w < opts.draws; ++w) {
                FitResult fit = factory(train, opts.draws == 1 ? ms : derive_seed(ms, {static_cast<std::uint64_t>(w)}));
                const double mse = test_mse(fit.beta_hat, test);
                if (!std::isfinite(mse)) return;
                s.mse += mse / opts.draws;
                s.method = fit.method;
                linear = linear && fit.linear_in_y();
                if (linear) {
                    const RiskReport e = exact_conditional_risk(fit, *model, train);
                    acc.bias_sq += e.bias_sq / opts.draws;
                    acc.variance += e.variance / opts.draws;
                    acc.total += e.total / opts.draws;
                }
            }
            if (linear) s.exact = acc;
            s.ok = true;
        } catch (const Error&) {
            s.ok = false;
        }
    });

    RiskReport r;
    r.mode = RiskMode::monte_carlo;
    r.noise = model->noise_variance();
    r.trials = opts.trials;
    std::vector<double> mses;
    bool all_exact = true;
    double bias = 0.0, var = 0.0, tot = 0.0;
    for (const Slot& s : slots) {
        if (!s.ok) {
            ++r.failed_trials;
            continue;
        }
        r.method = s.method;
        mses.push_back(s.mse);
        if (s.exact) {
            bias += s.exact->bias_sq;
            var += s.exact->variance;
            tot += s.exact->total;
        } else {
            all_exact = false;
        }
    }
    if (mses.empty()) {
        r.total = std::numeric_limits<double>::quiet_NaN();
        r.bias_sq = r.variance = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double m = static_cast<double>(mses.size());
    double mean = 0.0;
    for (double v : mses) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : mses) ss += (v - mean) * (v - mean);
    const double sd = mses.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    r.total = mean;
    r.mc_stderr = sd / std::sqrt(m);
    if (all_exact) {
        r.bias_sq = bias / m;
        r.variance = var / m;
        r.exact_total_mean = tot / m;
    } else {
        r.bias_sq = r.variance = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace projreg
