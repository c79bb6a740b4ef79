#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <vector>

#include "projreg/attack.hpp"
#include "projreg/bounds.hpp"
#include "projreg/harness/config.hpp"
#include "projreg/harness/table.hpp"
#include "projreg/risk.hpp"

namespace projreg::harness {

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the config seed
    std::optional<unsigned> workers;    // overrides the config worker count
};

struct RunOutcome {
    ResultTable table;
    std::vector<std::string> cell_errors;  // cells whose setup failed (rows kept, all trials failed)
    std::string fatal;                     // non-empty when the run stopped early
    std::size_t cells_total = 0;
    std::size_t cells_done = 0;
};

namespace detail {

inline std::optional<double> finite_or_none(double v) { return std::isfinite(v) ? std::optional(v) : std::nullopt; }
inline std::optional<double> finite_or_none(std::optional<double> v) {
    return v && !std::isnan(*v) ? v : std::nullopt;  // infinities are kept (invalid upper bounds)
}

inline bool sweeps_p(const ExperimentConfig& c) { return c.swept_variable() == "p"; }

inline bool sweeps_k(const ExperimentConfig& c) {
    return c.kind == ExperimentKind::vary_k || c.kind == ExperimentKind::bounds_overlay || c.kind == ExperimentKind::bv_split;
}

// Models per (model index, grid index). When p is swept, wishart_gapped and
// fixed-beta models use the leading block of one ambient model; the
// closed-form families are rebuilt at every p.
inline std::vector<std::vector<std::shared_ptr<const DataModel>>> build_models(const ExperimentConfig& c) {
    std::vector<std::vector<std::shared_ptr<const DataModel>>> out(c.models.size());
    for (std::size_t mi = 0; mi < c.models.size(); ++mi) {
        const ModelConfig& m = c.models[mi];
        if (sweeps_p(c)) {
            const bool truncate = m.cov.kind == CovarianceKind::wishart_gapped || m.beta.kind == BetaKind::fixed;
            if (truncate) {
                CovarianceSpec cov = m.cov;
                cov.p = static_cast<Eigen::Index>(c.grid.back());
                const DataModel ambient = build_ambient_model(cov, m.beta, m.seed);
                for (double g : c.grid) out[mi].push_back(std::make_shared<const DataModel>(truncate_model(ambient, static_cast<Eigen::Index>(g))));
            } else {
                for (double g : c.grid) {
                    CovarianceSpec cov = m.cov;
                    cov.p = static_cast<Eigen::Index>(g);
                    out[mi].push_back(std::make_shared<const DataModel>(build_model(cov, m.beta, m.seed)));
                }
            }
        } else {
            CovarianceSpec cov = m.cov;
            cov.p = *c.p;
            const auto model = std::make_shared<const DataModel>(build_model(cov, m.beta, m.seed));
            out[mi].assign(c.grid.size(), model);
        }
    }
    return out;
}

inline std::optional<Eigen::Index> cell_k(const ExperimentConfig& c, const MethodConfig& m, double g, Eigen::Index n, Eigen::Index p) {
    if (!needs_k(m.method)) return std::nullopt;
    Eigen::Index k = sweeps_k(c) ? static_cast<Eigen::Index>(g) : *m.k;
    if (const auto lim = k_limit(m.method, n, p)) k = std::min(k, *lim);
    return k;
}

inline FitFactory make_factory(const MethodConfig& m, std::optional<Eigen::Index> k, const std::shared_ptr<const DataModel>& model) {
    const std::vector<double> grid = m.lambda_grid.empty() ? default_ridge_grid() : m.lambda_grid;
    switch (m.method) {
    case Method::ols: return [](const Dataset& d, std::uint64_t) { return fit_ols(d); };
    case Method::ridge: return [l = *m.lambda](const Dataset& d, std::uint64_t) { return fit_ridge(d, l); };
    case Method::ridge_cv: return [grid](const Dataset& d, std::uint64_t) { return select_ridge_loocv(d, grid).fit; };
    case Method::pca_ols: return [k](const Dataset& d, std::uint64_t) { return fit_pca_ols(d, *k); };
    case Method::oracle_pcr: return [k, model](const Dataset& d, std::uint64_t) { return fit_oracle_pcr(d, *model, *k); };
    case Method::pls: return [k](const Dataset& d, std::uint64_t) { return fit_pls(d, *k); };
    case Method::gaussian_proj:
        return [k](const Dataset& d, std::uint64_t s) { return fit_random_projection(d, RandomProjectionKind::gaussian, *k, s); };
    case Method::ortho_proj:
        return [k](const Dataset& d, std::uint64_t s) { return fit_random_projection(d, RandomProjectionKind::orthogonal, *k, s); };
    case Method::ortho_ridge:
        if (m.lambda)
            return [k, l = *m.lambda](const Dataset& d, std::uint64_t s) {
                FitResult f = fit_random_projection(d, RandomProjectionKind::orthogonal, *k, s, l);
                f.method = Method::ortho_ridge;
                return f;
            };
        return [k, grid](const Dataset& d, std::uint64_t s) {
            return fit_projected_ridge_cv(d, random_projection(RandomProjectionKind::orthogonal, d.p(), *k, s), grid);
        };
    case Method::generative: return [k](const Dataset& d, std::uint64_t) { return fit_generative(d, *k); };
    case Method::null: {
        const FitResult f = null_and_truth_baselines(*model).first;
        return [f](const Dataset&, std::uint64_t) { return f; };
    }
    case Method::truth: {
        const FitResult f = null_and_truth_baselines(*model).second;
        return [f](const Dataset&, std::uint64_t) { return f; };
    }
    }
    fail(ErrorCode::BadParams, "no factory for method");
}

inline void fill_bounds(ResultRow& row, const ExperimentConfig& c, const DataModel& model, Eigen::Index n, Eigen::Index k,
                        std::uint64_t cell_seed) {
    BoundReport b;
    try {
        b = thm1_bounds(model, n, k, c.bounds.t, c.bounds.c);
    } catch (const Error&) {
        return;  // k or t outside the theorem's range: bound columns stay empty
    }
    row.var_lower = finite_or_none(b.var_lower);
    row.var_upper = finite_or_none(b.var_upper);
    row.bias_upper = finite_or_none(b.bias_upper);
    row.bound_probability = b.probability;
    // lambda_p ||Pi_perp beta||^2 averaged over the same training draws as the risk
    const auto shared = std::make_shared<const DataModel>(model);
    const double lp = model.spectral.values(model.dim() - 1);
    double acc = 0.0;
    int used = 0;
    for (int t = 0; t < c.mc.trials; ++t) {
        try {
            const Dataset d = sample(shared, n, trial_train_seed(cell_seed, t));
            const Matrix v = pca_projection(d, k).pi;
            const Vector r = model.beta - v * (v.transpose() * model.beta);
            acc += lp * r.squaredNorm();
            ++used;
        } catch (const Error&) {
        }
    }
    if (used) row.bias_lower = acc / used;
}

inline void run_risk_cell(ResultRow& row, const ExperimentConfig& c, const MethodConfig& m, const std::shared_ptr<const DataModel>& model,
                          std::uint64_t cell_seed) {
    MonteCarloOptions o;
    o.trials = c.mc.trials;
    o.n_test = c.mc.n_test;
    o.workers = 1;
    o.draws = m.weight_draws;
    const auto k = row.k ? std::optional<Eigen::Index>(*row.k) : std::nullopt;
    const RiskReport r = monte_carlo_mse(make_factory(m, k, model), model, row.n, cell_seed, o);
    row.noise = r.noise;
    row.total = finite_or_none(r.total);
    row.bias_sq = finite_or_none(r.bias_sq);
    row.variance = finite_or_none(r.variance);
    row.mc_stderr = r.mc_stderr ? finite_or_none(*r.mc_stderr) : std::nullopt;
    row.failed_trials = r.failed_trials;
    if (c.bounds.enabled && m.method == Method::pca_ols && k) fill_bounds(row, c, *model, row.n, *k, cell_seed);
}

inline void run_attack_cell(ResultRow& row, const ExperimentConfig& c, const MethodConfig& m, const std::shared_ptr<const DataModel>& model,
                            double g, std::uint64_t cell_seed) {
    AttackSpec spec;
    spec.epsilon = c.attack.epsilon;
    spec.delta = c.attack.delta;
    spec.alpha_mode = c.attack.alpha;
    if (c.attack.sweep == AttackSweep::delta) spec.delta = g;
    if (c.attack.sweep == AttackSweep::epsilon) spec.epsilon = g;
    AttackMethod am{m.method, row.k ? std::optional<Eigen::Index>(*row.k) : std::nullopt, m.lambda_grid};

    std::vector<double> clean, dirty, hs;
    double delta_used = spec.delta;
    for (int t = 0; t < c.mc.trials; ++t) {
        try {
            const Dataset train = sample(model, row.n, trial_train_seed(cell_seed, t));
            spec.seed = trial_method_seed(cell_seed, t);
            const PoisonedDataset pd = train.p() > train.n() ? craft_poison(train, spec) : craft_underparam_poison(train, spec.epsilon);
            delta_used = pd.spec.delta;
            const AttackRow ar = evaluate_attack({am}, train, model, pd, c.mc.n_test).front();
            if (!ar.error.empty() || !std::isfinite(ar.mse_clean) || !std::isfinite(ar.mse_poisoned)) {
                ++row.failed_trials;
                continue;
            }
            clean.push_back(ar.mse_clean);
            dirty.push_back(ar.mse_poisoned);
            hs.push_back(ar.h);
        } catch (const Error&) {
            ++row.failed_trials;
        }
    }
    row.epsilon = spec.epsilon;
    row.delta = delta_used;
    row.noise = model->noise_variance();
    if (dirty.empty()) return;
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double mc = mean(clean), md = mean(dirty);
    double ss = 0.0;
    for (double x : dirty) ss += (x - md) * (x - md);
    const double m_ = static_cast<double>(dirty.size());
    row.mse_clean = finite_or_none(mc);
    row.mse_poisoned = finite_or_none(md);
    row.total = row.mse_poisoned;
    row.mc_stderr = dirty.size() > 1 ? finite_or_none(std::sqrt(ss / (m_ - 1.0) / m_)) : std::optional(0.0);
    row.ratio = finite_or_none(md / mc);
    row.h = finite_or_none(mean(hs));
}

}  // namespace detail

/// Runs every (model, method, grid value) cell. Cells run concurrently up to
/// the worker count; rows come back ordered by model, method, grid value
/// regardless of scheduling. Failed trials are counted per row. A failure
/// outside the library's own errors stops the run and the finished rows
/// are returned with `fatal` set.
inline RunOutcome execute(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    using namespace detail;
    ExperimentConfig c = cfg;
    if (opts.seed) c.seed = *opts.seed;
    if (opts.workers) c.workers = *opts.workers;

    RunOutcome out;
    std::vector<std::vector<std::shared_ptr<const DataModel>>> models;
    try {
        models = build_models(c);
    } catch (const std::exception& e) {
        out.fatal = std::string("model construction failed: ") + e.what();
        return out;
    }

    const std::size_t nm = c.models.size(), nf = c.methods.size(), ng = c.grid.size();
    const std::size_t total = nm * nf * ng;
    out.cells_total = total;
    std::vector<std::optional<ResultRow>> slots(total);
    std::vector<std::string> errors(total);
    std::atomic<bool> stop{false};
    std::mutex fatal_mu;
    const bool data_varies = sweeps_p(c) || c.kind == ExperimentKind::vary_n;

    parallel_for(total, c.workers, [&](std::size_t idx) {
        if (stop) return;
        const std::size_t mi = idx / (nf * ng), fi = (idx / ng) % nf, gi = idx % ng;
        const MethodConfig& m = c.methods[fi];
        const double g = c.grid[gi];
        const auto& model = models[mi][gi];
        ResultRow row;
        row.experiment_id = c.id;
        row.model = c.models[mi].label;
        row.kind = std::string(to_string(c.kind));
        row.method = std::string(projreg::to_string(m.method));
        row.swept_variable = c.swept_variable();
        row.swept_value = g;
        row.p = model->dim();
        row.n = c.kind == ExperimentKind::vary_n ? static_cast<long long>(g) : *c.n;
        const auto k = cell_k(c, m, g, row.n, row.p);
        if (k) row.k = *k;
        row.trials = c.mc.trials;
        // common random numbers: every method in a cell sees the same draws
        const std::uint64_t cell_seed = derive_seed(c.seed, {static_cast<std::uint64_t>(mi), data_varies ? static_cast<std::uint64_t>(gi) : 0u});
        try {
            if (c.kind == ExperimentKind::attack_sweep)
                run_attack_cell(row, c, m, model, g, cell_seed);
            else
                run_risk_cell(row, c, m, model, cell_seed);
        } catch (const Error& e) {
            row.failed_trials = row.trials;
            errors[idx] = row.model + "/" + row.method + "/" + row.swept_variable + "=" + format_real(g) + ": " + e.what();
        } catch (const std::exception& e) {
            std::lock_guard lock(fatal_mu);
            if (out.fatal.empty()) out.fatal = e.what();
            stop = true;
            return;
        }
        slots[idx] = std::move(row);
    });

    for (std::size_t i = 0; i < total; ++i) {
        if (!slots[i]) continue;
        out.table.rows.push_back(std::move(*slots[i]));
        ++out.cells_done;
        if (!errors[i].empty()) out.cell_errors.push_back(errors[i]);
    }
    return out;
}

/// Full table or an exception if the run stopped early.
inline ResultTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    RunOutcome r = execute(cfg, opts);
    if (!r.fatal.empty()) fail(ErrorCode::Io, "run stopped early: " + r.fatal);
    return std::move(r.table);
}

/// Sidecar metadata: schema, effective seed, grid and the artifact choices
/// listed in the config notes.
inline nlohmann::json run_metadata(const ExperimentConfig& cfg, const RunOptions& opts, const RunOutcome& r) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["experiment_id"] = cfg.id;
    j["description"] = cfg.description;
    j["kind"] = std::string(to_string(cfg.kind));
    j["seed"] = opts.seed.value_or(cfg.seed);
    j["swept_variable"] = cfg.swept_variable();
    j["grid"] = cfg.grid;
    j["mc"] = {{"trials", cfg.mc.trials}, {"n_test", cfg.mc.n_test}};
    std::vector<std::string> cols;
    for (const auto& col : columns()) cols.emplace_back(col.name);
    j["columns"] = cols;
    j["artifact_choices"] = cfg.notes;
    j["cell_errors"] = r.cell_errors;
    j["complete"] = r.fatal.empty();
    if (!r.fatal.empty()) j["fatal"] = r.fatal;
    j["rows"] = r.table.rows.size();
    return j;
}

}  // namespace projreg::harness
