#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "projreg/attack.hpp"
#include "projreg/data_model.hpp"
#include "projreg/estimators.hpp"

namespace projreg::harness {

using json = nlohmann::json;

enum class ExperimentKind { vary_p, vary_n, vary_k, attack_sweep, bounds_overlay, bv_split };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::vary_p: return "vary_p";
    case ExperimentKind::vary_n: return "vary_n";
    case ExperimentKind::vary_k: return "vary_k";
    case ExperimentKind::attack_sweep: return "attack_sweep";
    case ExperimentKind::bounds_overlay: return "bounds_overlay";
    case ExperimentKind::bv_split: return "bv_split";
    }
    return "?";
}

struct ModelConfig {
    std::string label;
    CovarianceSpec cov;
    BetaSpec beta;
    std::uint64_t seed = 1;
};

struct MethodConfig {
    Method method = Method::ols;
    std::optional<Eigen::Index> k;
    std::optional<double> lambda;
    std::vector<double> lambda_grid;  // empty: default_ridge_grid()
    int weight_draws = 1;
};

struct McConfig {
    int trials = 16;
    Eigen::Index n_test = 256;
};

struct BoundsConfig {
    bool enabled = false;
    double t = 3.0;
    double c = 1.0;
};

enum class AttackSweep { p, delta, epsilon };

struct AttackConfig {
    double epsilon = 1.0;
    double delta = 1e-6;
    AlphaMode alpha = AlphaMode::random;
    AttackSweep sweep = AttackSweep::p;
};

struct ExperimentConfig {
    std::string id;
    std::string description;
    ExperimentKind kind = ExperimentKind::vary_p;
    std::vector<ModelConfig> models;
    std::optional<Eigen::Index> n;
    std::optional<Eigen::Index> p;
    std::vector<double> grid;
    std::vector<MethodConfig> methods;
    McConfig mc;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    BoundsConfig bounds;
    AttackConfig attack;
    std::string output;  // file stem, defaults to id
    std::vector<std::string> notes;

    /// Name of the swept column value.
    std::string swept_variable() const {
        switch (kind) {
        case ExperimentKind::vary_p: return "p";
        case ExperimentKind::vary_n: return "n";
        case ExperimentKind::attack_sweep:
            return attack.sweep == AttackSweep::p ? "p" : attack.sweep == AttackSweep::delta ? "delta" : "epsilon";
        default: return "k";
        }
    }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& path, const std::string& what) {
    fail(ErrorCode::Validation, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

inline std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) invalid(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) invalid(join_path(path, it.key()), "unknown key");
    }
}

inline double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) invalid(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(path, "must be finite");
    return d;
}

inline std::int64_t get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) invalid(path, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::int64_t get_positive(const json& v, const std::string& path) {
    const auto i = get_int(v, path);
    if (i < 1) invalid(path, "must be >= 1");
    return i;
}

inline std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) invalid(path, "expected a string");
    return v.get<std::string>();
}

inline bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) invalid(path, "expected true or false");
    return v.get<bool>();
}

template <typename Enum, std::size_t N>
Enum get_enum(const json& v, const std::string& path, const std::pair<const char*, Enum> (&table)[N]) {
    const std::string s = get_string(v, path);
    std::string options;
    for (const auto& [name, value] : table) {
        if (s == name) return value;
        options += (options.empty() ? "" : ", ") + std::string(name);
    }
    invalid(path, "'" + s + "' is not one of {" + options + "}");
}

inline std::vector<double> get_grid(const json& v, const std::string& path, bool integer) {
    if (!v.is_array() || v.empty()) invalid(path, "expected a nonempty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string ip = path + "[" + std::to_string(i) + "]";
        const double d = integer ? static_cast<double>(get_positive(v[i], ip)) : get_number(v[i], ip);
        if (!out.empty() && !(d > out.back())) invalid(ip, "grid must be strictly increasing (no duplicates)");
        out.push_back(d);
    }
    return out;
}

inline CovarianceSpec parse_covariance(const json& v, const std::string& path) {
    reject_unknown(v, path, {"kind", "p", "k_gap", "gap_ratio", "exp_rate", "poly_power", "rescale", "ambient"});
    static constexpr std::pair<const char*, CovarianceKind> kinds[] = {{"isotropic", CovarianceKind::isotropic},
                                                                       {"gapped", CovarianceKind::gapped},
                                                                       {"exp_decay", CovarianceKind::exp_decay},
                                                                       {"poly_decay", CovarianceKind::poly_decay},
                                                                       {"wishart_gapped", CovarianceKind::wishart_gapped}};
    CovarianceSpec c;
    if (!v.contains("kind")) invalid(join_path(path, "kind"), "required");
    c.kind = get_enum(v["kind"], join_path(path, "kind"), kinds);
    if (v.contains("p")) c.p = get_positive(v["p"], join_path(path, "p"));
    if (v.contains("k_gap")) c.k_gap = get_int(v["k_gap"], join_path(path, "k_gap"));
    if (v.contains("gap_ratio")) c.gap_ratio = get_number(v["gap_ratio"], join_path(path, "gap_ratio"));
    if (v.contains("exp_rate")) c.exp_rate = get_number(v["exp_rate"], join_path(path, "exp_rate"));
    if (v.contains("poly_power")) c.poly_power = get_number(v["poly_power"], join_path(path, "poly_power"));
    if (v.contains("rescale")) c.rescale = get_number(v["rescale"], join_path(path, "rescale"));
    if (v.contains("ambient")) c.ambient = get_positive(v["ambient"], join_path(path, "ambient"));
    if (c.kind == CovarianceKind::gapped && !(c.gap_ratio > 0.0 && c.gap_ratio < 1.0))
        invalid(join_path(path, "gap_ratio"), "must lie in (0, 1)");
    if (c.kind == CovarianceKind::gapped && c.k_gap < 1) invalid(join_path(path, "k_gap"), "must be >= 1");
    if (c.kind == CovarianceKind::exp_decay && !(c.exp_rate > 0.0)) invalid(join_path(path, "exp_rate"), "must be > 0");
    if (c.kind == CovarianceKind::poly_decay && !(c.poly_power > 0.0)) invalid(join_path(path, "poly_power"), "must be > 0");
    if (c.kind == CovarianceKind::wishart_gapped) {
        if (c.k_gap < 0 || c.k_gap > c.ambient) invalid(join_path(path, "k_gap"), "must lie in [0, ambient]");
        if (!(c.rescale > 0.0)) invalid(join_path(path, "rescale"), "must be > 0");
    }
    return c;
}

inline BetaSpec parse_beta(const json& v, const std::string& path) {
    reject_unknown(v, path, {"kind", "snr", "sigma", "fixed", "norm", "match_gaussian_noise"});
    static constexpr std::pair<const char*, BetaKind> kinds[] = {{"gaussian_iso", BetaKind::gaussian_iso},
                                                                 {"aligned_constant", BetaKind::aligned_constant},
                                                                 {"misaligned_ramp", BetaKind::misaligned_ramp},
                                                                 {"fixed", BetaKind::fixed}};
    BetaSpec b;
    if (v.contains("kind")) b.kind = get_enum(v["kind"], join_path(path, "kind"), kinds);
    if (v.contains("snr")) {
        b.snr = get_number(v["snr"], join_path(path, "snr"));
        if (!(*b.snr > 0.0)) invalid(join_path(path, "snr"), "must be > 0");
    }
    if (v.contains("sigma")) {
        b.sigma = get_number(v["sigma"], join_path(path, "sigma"));
        if (!(*b.sigma >= 0.0)) invalid(join_path(path, "sigma"), "must be >= 0");
    }
    if (!b.snr && !b.sigma) invalid(path, "needs snr or sigma");
    if (v.contains("norm")) {
        b.norm = get_number(v["norm"], join_path(path, "norm"));
        if (!(*b.norm > 0.0)) invalid(join_path(path, "norm"), "must be > 0");
    }
    if (v.contains("match_gaussian_noise")) {
        b.match_gaussian_noise = get_bool(v["match_gaussian_noise"], join_path(path, "match_gaussian_noise"));
        if (b.match_gaussian_noise && !b.snr) invalid(join_path(path, "match_gaussian_noise"), "needs snr");
    }
    if (b.kind == BetaKind::fixed) {
        const std::string fp = join_path(path, "fixed");
        if (!v.contains("fixed") || !v["fixed"].is_array() || v["fixed"].empty()) invalid(fp, "fixed beta needs a nonempty array");
        b.fixed.resize(static_cast<Eigen::Index>(v["fixed"].size()));
        for (std::size_t i = 0; i < v["fixed"].size(); ++i)
            b.fixed(static_cast<Eigen::Index>(i)) = get_number(v["fixed"][i], fp + "[" + std::to_string(i) + "]");
    } else if (v.contains("fixed")) {
        invalid(join_path(path, "fixed"), "only allowed with kind = fixed");
    }
    return b;
}

inline bool needs_k(Method m) {
    switch (m) {
    case Method::pca_ols:
    case Method::oracle_pcr:
    case Method::pls:
    case Method::gaussian_proj:
    case Method::ortho_proj:
    case Method::ortho_ridge:
    case Method::generative: return true;
    default: return false;
    }
}

inline bool is_random_projection(Method m) {
    return m == Method::gaussian_proj || m == Method::ortho_proj || m == Method::ortho_ridge;
}

// largest k the method accepts for an n x p design; nullopt if unbounded
inline std::optional<Eigen::Index> k_limit(Method m, Eigen::Index n, Eigen::Index p) {
    switch (m) {
    case Method::pca_ols:
    case Method::pls: return std::min(n, p);
    case Method::oracle_pcr: return p;
    default: return std::nullopt;
    }
}

inline MethodConfig parse_method(const json& v, const std::string& path) {
    reject_unknown(v, path, {"name", "k", "lambda", "lambda_grid", "weight_draws"});
    MethodConfig m;
    if (!v.contains("name")) invalid(join_path(path, "name"), "required");
    const std::string name = get_string(v["name"], join_path(path, "name"));
    const auto method = method_from_string(name);
    if (!method) invalid(join_path(path, "name"), "unknown method '" + name + "'");
    m.method = *method;
    if (v.contains("k")) m.k = get_positive(v["k"], join_path(path, "k"));
    if (v.contains("lambda")) {
        m.lambda = get_number(v["lambda"], join_path(path, "lambda"));
        if (!(*m.lambda >= 0.0)) invalid(join_path(path, "lambda"), "must be >= 0");
    }
    if (v.contains("lambda_grid")) {
        const std::string gp = join_path(path, "lambda_grid");
        const json& g = v["lambda_grid"];
        if (g.is_object()) {
            reject_unknown(g, gp, {"lo", "hi", "count"});
            if (!g.contains("lo") || !g.contains("hi") || !g.contains("count")) invalid(gp, "needs lo, hi and count");
            const double lo = get_number(g["lo"], gp + ".lo"), hi = get_number(g["hi"], gp + ".hi");
            const auto count = get_positive(g["count"], gp + ".count");
            if (!(lo > 0.0 && hi >= lo)) invalid(gp, "needs 0 < lo <= hi");
            m.lambda_grid = log_grid(lo, hi, static_cast<int>(count));
        } else {
            m.lambda_grid = get_grid(g, gp, false);
            if (!(m.lambda_grid.front() > 0.0)) invalid(gp, "values must be > 0");
        }
    }
    if (v.contains("weight_draws")) {
        m.weight_draws = static_cast<int>(get_positive(v["weight_draws"], join_path(path, "weight_draws")));
        if (!is_random_projection(m.method) && m.weight_draws != 1)
            invalid(join_path(path, "weight_draws"), "only random projection methods take weight draws");
    }
    if (m.method == Method::ridge && !m.lambda) invalid(join_path(path, "lambda"), "ridge needs a fixed lambda (use ridge_cv for LOOCV)");
    if (m.lambda && m.method != Method::ridge && m.method != Method::ortho_ridge)
        invalid(join_path(path, "lambda"), "only ridge and ortho_ridge take a fixed lambda");
    if (!m.lambda_grid.empty() && m.method != Method::ridge_cv && m.method != Method::ortho_ridge)
        invalid(join_path(path, "lambda_grid"), "only ridge_cv and ortho_ridge select lambda");
    if (m.k && !needs_k(m.method)) invalid(join_path(path, "k"), std::string(to_string(m.method)) + " takes no k");
    return m;
}

}  // namespace detail

/// Parses and checks a JSON experiment description. Every failure is a
/// Validation error whose message starts with the offending key path.
inline ExperimentConfig validate_config(std::string_view text) {
    using namespace detail;
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Validation, std::string("<root>: not valid JSON: ") + e.what());
    }
    reject_unknown(root, "", {"id", "description", "kind", "models", "n", "p", "grid", "methods", "mc", "seed", "workers", "bounds",
                              "attack", "output", "notes"});
    static constexpr std::pair<const char*, ExperimentKind> kinds[] = {
        {"vary_p", ExperimentKind::vary_p},       {"vary_n", ExperimentKind::vary_n},
        {"vary_k", ExperimentKind::vary_k},       {"attack_sweep", ExperimentKind::attack_sweep},
        {"bounds_overlay", ExperimentKind::bounds_overlay}, {"bv_split", ExperimentKind::bv_split}};

    ExperimentConfig c;
    if (!root.contains("id")) invalid("id", "required");
    c.id = get_string(root["id"], "id");
    if (c.id.empty() || c.id.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_-") != std::string::npos)
        invalid("id", "use lowercase letters, digits, '_' or '-'");
    if (root.contains("description")) c.description = get_string(root["description"], "description");
    if (!root.contains("kind")) invalid("kind", "required");
    c.kind = get_enum(root["kind"], "kind", kinds);
    if (root.contains("n")) c.n = get_positive(root["n"], "n");
    if (root.contains("p")) c.p = get_positive(root["p"], "p");
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !(root["seed"].is_number_integer() && root["seed"].get<std::int64_t>() >= 0))
            invalid("seed", "expected a non-negative integer");
        c.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("workers")) c.workers = static_cast<unsigned>(get_positive(root["workers"], "workers"));
    if (root.contains("output")) c.output = get_string(root["output"], "output");
    if (c.output.empty()) c.output = c.id;
    if (root.contains("notes")) {
        if (!root["notes"].is_array()) invalid("notes", "expected an array of strings");
        for (std::size_t i = 0; i < root["notes"].size(); ++i) c.notes.push_back(get_string(root["notes"][i], "notes[" + std::to_string(i) + "]"));
    }

    if (root.contains("mc")) {
        reject_unknown(root["mc"], "mc", {"trials", "n_test"});
        if (root["mc"].contains("trials")) c.mc.trials = static_cast<int>(get_positive(root["mc"]["trials"], "mc.trials"));
        if (root["mc"].contains("n_test")) c.mc.n_test = get_positive(root["mc"]["n_test"], "mc.n_test");
    }
    if (root.contains("bounds")) {
        reject_unknown(root["bounds"], "bounds", {"t", "c"});
        c.bounds.enabled = true;
        if (root["bounds"].contains("t")) c.bounds.t = get_number(root["bounds"]["t"], "bounds.t");
        if (root["bounds"].contains("c")) c.bounds.c = get_number(root["bounds"]["c"], "bounds.c");
        if (!(c.bounds.t > 1.0)) invalid("bounds.t", "must be > 1");
        if (!(c.bounds.c > 0.0)) invalid("bounds.c", "must be > 0");
    }
    if (c.kind == ExperimentKind::bounds_overlay) c.bounds.enabled = true;
    if (root.contains("attack")) {
        if (c.kind != ExperimentKind::attack_sweep) invalid("attack", "only used by attack_sweep");
        const json& a = root["attack"];
        reject_unknown(a, "attack", {"epsilon", "delta", "alpha", "sweep"});
        static constexpr std::pair<const char*, AlphaMode> alphas[] = {{"random", AlphaMode::random}, {"uniform", AlphaMode::uniform}};
        static constexpr std::pair<const char*, AttackSweep> sweeps[] = {
            {"p", AttackSweep::p}, {"delta", AttackSweep::delta}, {"epsilon", AttackSweep::epsilon}};
        if (a.contains("epsilon")) c.attack.epsilon = get_number(a["epsilon"], "attack.epsilon");
        if (a.contains("delta")) c.attack.delta = get_number(a["delta"], "attack.delta");
        if (a.contains("alpha")) c.attack.alpha = get_enum(a["alpha"], "attack.alpha", alphas);
        if (a.contains("sweep")) c.attack.sweep = get_enum(a["sweep"], "attack.sweep", sweeps);
        if (!(c.attack.epsilon > 0.0)) invalid("attack.epsilon", "must be > 0");
        if (!(c.attack.delta >= 0.0)) invalid("attack.delta", "must be >= 0");
    }

    if (!root.contains("models") || !root["models"].is_array() || root["models"].empty()) invalid("models", "expected a nonempty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < root["models"].size(); ++i) {
        const std::string mp = "models[" + std::to_string(i) + "]";
        const json& mv = root["models"][i];
        reject_unknown(mv, mp, {"label", "covariance", "beta", "seed"});
        ModelConfig m;
        if (!mv.contains("covariance")) invalid(mp + ".covariance", "required");
        if (!mv.contains("beta")) invalid(mp + ".beta", "required");
        m.cov = parse_covariance(mv["covariance"], mp + ".covariance");
        m.beta = parse_beta(mv["beta"], mp + ".beta");
        m.label = mv.contains("label") ? get_string(mv["label"], mp + ".label") : std::string(projreg::to_string(m.cov.kind));
        if (mv.contains("seed")) {
            if (!mv["seed"].is_number_integer() || mv["seed"].get<std::int64_t>() < 0) invalid(mp + ".seed", "expected a non-negative integer");
            m.seed = mv["seed"].get<std::uint64_t>();
        }
        if (!labels.insert(m.label).second) invalid(mp + ".label", "duplicate label '" + m.label + "'");
        c.models.push_back(std::move(m));
    }

    if (!root.contains("methods") || !root["methods"].is_array() || root["methods"].empty())
        invalid("methods", "expected a nonempty array");
    for (std::size_t i = 0; i < root["methods"].size(); ++i)
        c.methods.push_back(parse_method(root["methods"][i], "methods[" + std::to_string(i) + "]"));

    const std::string sv = c.swept_variable();
    if (!root.contains("grid")) invalid("grid", "required");
    const bool integer_grid = sv != "delta" && sv != "epsilon";
    c.grid = get_grid(root["grid"], "grid", integer_grid);
    if (sv == "delta" && c.grid.front() < 0.0) invalid("grid[0]", "delta must be >= 0");
    if (sv == "epsilon" && !(c.grid.front() > 0.0)) invalid("grid[0]", "epsilon must be > 0");

    // the fixed dimensions each kind needs
    const bool needs_n = c.kind != ExperimentKind::vary_n;
    const bool needs_p = c.kind != ExperimentKind::vary_p && !(c.kind == ExperimentKind::attack_sweep && sv == "p");
    if (needs_n && !c.n) invalid("n", "required for kind " + std::string(to_string(c.kind)));
    if (needs_p && !c.p) invalid("p", "required for kind " + std::string(to_string(c.kind)));
    if (!needs_n && c.n) invalid("n", "n is the swept variable here");
    if (!needs_p && c.p) invalid("p", "p is the swept variable here");

    const auto gmax = static_cast<Eigen::Index>(c.grid.back());
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        const std::string mp = "models[" + std::to_string(i) + "].covariance";
        const ModelConfig& m = c.models[i];
        const Eigen::Index pmax = sv == "p" ? gmax : *c.p;
        if (m.cov.kind == CovarianceKind::wishart_gapped && m.cov.ambient < pmax)
            invalid(mp + ".ambient", "ambient dimension " + std::to_string(m.cov.ambient) + " is smaller than p=" + std::to_string(pmax));
        if (m.beta.kind == BetaKind::fixed) {
            const Eigen::Index amb = m.cov.kind == CovarianceKind::wishart_gapped ? m.cov.ambient : pmax;
            if (m.beta.fixed.size() != amb)
                invalid("models[" + std::to_string(i) + "].beta.fixed", "needs " + std::to_string(amb) + " entries");
        }
    }

    const bool sweeps_k = c.kind == ExperimentKind::vary_k || c.kind == ExperimentKind::bounds_overlay || c.kind == ExperimentKind::bv_split;
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        const std::string mp = "methods[" + std::to_string(i) + "]";
        const MethodConfig& m = c.methods[i];
        if (sweeps_k) {
            if (m.k) invalid(mp + ".k", "k comes from the grid for kind " + std::string(to_string(c.kind)));
            const auto lim = detail::k_limit(m.method, *c.n, *c.p);
            if (needs_k(m.method) && lim && gmax > *lim)
                invalid("grid", "k=" + std::to_string(gmax) + " exceeds the limit " + std::to_string(*lim) + " of " +
                                    std::string(to_string(m.method)) + " (min(n,p) for pca_ols and pls)");
        } else {
            if (needs_k(m.method) && !m.k) invalid(mp + ".k", std::string(to_string(m.method)) + " needs k");
            // vary_p / vary_n clamp k to min(n, p) per cell; the fixed side still bounds it
            const Eigen::Index nn = c.n.value_or(std::numeric_limits<Eigen::Index>::max());
            const Eigen::Index pp = c.p.value_or(std::numeric_limits<Eigen::Index>::max());
            const auto lim = m.k ? detail::k_limit(m.method, nn, pp) : std::nullopt;
            if (lim && *m.k > *lim)
                invalid(mp + ".k", "k=" + std::to_string(*m.k) + " exceeds min(n,p)=" + std::to_string(*lim));
        }
        if (c.kind == ExperimentKind::bv_split && m.method != Method::null && m.method != Method::truth) {
            const bool linear = m.method != Method::pls && m.method != Method::generative;
            if (!linear) invalid(mp + ".name", std::string(to_string(m.method)) + " has no exact bias-variance split");
        }
        if (c.kind == ExperimentKind::attack_sweep) {
            static const std::set<Method> ok = {Method::ols, Method::ridge_cv, Method::pca_ols, Method::pls, Method::generative};
            if (!ok.count(m.method)) invalid(mp + ".name", std::string(to_string(m.method)) + " is not supported by attack_sweep");
        }
    }
    if (c.kind == ExperimentKind::bounds_overlay) {
        const bool has_pca = std::any_of(c.methods.begin(), c.methods.end(), [](const MethodConfig& m) { return m.method == Method::pca_ols; });
        if (!has_pca) invalid("methods", "bounds_overlay needs pca_ols");
    }
    if (c.bounds.enabled && c.n && !(c.bounds.t < static_cast<double>(*c.n))) invalid("bounds.t", "must be < n");
    return c;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) { return validate_config(read_text_file(path)); }

}  // namespace projreg::harness
