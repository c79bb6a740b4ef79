#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "projreg/harness/runner.hpp"

using namespace projreg;
using namespace projreg::harness;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "id": "small",
  "kind": "vary_k",
  "n": 20,
  "p": 10,
  "grid": [1, 2, 3],
  "models": [{"label": "iso", "covariance": {"kind": "isotropic"}, "beta": {"kind": "gaussian_iso", "snr": 4}}],
  "methods": [{"name": "pca_ols"}, {"name": "pls"}, {"name": "gaussian_proj", "weight_draws": 2}, {"name": "truth"}],
  "mc": {"trials": 4, "n_test": 32},
  "seed": 5
})";

std::string with(const std::string& key_value) {
    std::string s = kSmall;
    const auto pos = s.rfind('}');
    return s.substr(0, pos) + ", " + key_value + "}";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
}

void expect_invalid(const std::string& text, const std::string& path_prefix) {
    try {
        validate_config(text);
        ADD_FAILURE() << "accepted: " << path_prefix;
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Validation);
        EXPECT_EQ(std::string(e.what()).rfind("Validation: " + path_prefix, 0), 0u) << e.what();
    }
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("projreg_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PROJREG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, DefaultsFilled) {
    const ExperimentConfig c = validate_config(replace(kSmall, R"("mc": {"trials": 4, "n_test": 32},)", ""));
    EXPECT_EQ(c.mc.trials, 16);
    EXPECT_EQ(c.mc.n_test, 256);
    EXPECT_EQ(c.output, "small");
    EXPECT_EQ(c.models[0].beta.snr, 4.0);
    EXPECT_EQ(c.methods[2].weight_draws, 2);
    EXPECT_EQ(c.swept_variable(), "k");
}

TEST(Config, RejectionsCarryKeyPaths) {
    expect_invalid(replace(kSmall, "[1, 2, 3]", "[1, 2, 2]"), "grid[2]");
    expect_invalid(replace(kSmall, "[1, 2, 3]", "[3, 2]"), "grid[1]");
    expect_invalid(replace(kSmall, "[1, 2, 3]", "[]"), "grid");
    expect_invalid(with(R"("colour": 1)"), "colour");
    expect_invalid(replace(kSmall, R"("trials": 4)", R"("trials": 4, "T": 3)"), "mc.T");
    expect_invalid(replace(kSmall, R"("kind": "isotropic")", R"("kind": "spiky")"), "models[0].covariance.kind");
    expect_invalid(replace(kSmall, R"({"name": "pls"})", R"({"name": "lasso"})"), "methods[1].name");
    expect_invalid(replace(kSmall, R"({"name": "pls"})", R"({"name": "ols", "k": 3})"), "methods[1].k");
    expect_invalid(replace(kSmall, R"("snr": 4)", R"("snr": -4)"), "models[0].beta.snr");
    expect_invalid(replace(kSmall, R"("n": 20,)", ""), "n");
    expect_invalid("{ not json", "<root>");
    // k beyond min(n, p) for PCA-OLS
    expect_invalid(replace(kSmall, "[1, 2, 3]", "[1, 2, 11]"), "grid");
    const std::string empty_methods = replace(kSmall, R"([{"name": "pca_ols"}, {"name": "pls"}, {"name": "gaussian_proj", "weight_draws": 2}, {"name": "truth"}])", "[]");
    expect_invalid(empty_methods, "methods");
}

TEST(Config, KindSpecificRules) {
    const std::string vary_p = R"({"id": "vp", "kind": "vary_p", "n": 10, "grid": [4, 8, 16],
        "models": [{"covariance": {"kind": "isotropic"}, "beta": {"sigma": 1}}],
        "methods": [{"name": "pca_ols", "k": 12}]})";
    expect_invalid(vary_p, "methods[0].k");
    EXPECT_NO_THROW(validate_config(replace(vary_p, R"("k": 12)", R"("k": 8)")));
    expect_invalid(replace(vary_p, R"("n": 10,)", R"("n": 10, "p": 4,)"), "p");
    expect_invalid(replace(vary_p, R"("kind": "isotropic")", R"("kind": "wishart_gapped", "ambient": 8, "k_gap": 2)"), "models[0].covariance.ambient");

    const std::string split = replace(replace(kSmall, R"("kind": "vary_k")", R"("kind": "bv_split")"), R"({"name": "pls"}, )", "");
    EXPECT_NO_THROW(validate_config(split));
    expect_invalid(replace(kSmall, R"("kind": "vary_k")", R"("kind": "bv_split")"), "methods[1].name");
    expect_invalid(with(R"("attack": {"epsilon": 1})"), "attack");
    expect_invalid(replace(kSmall, R"({"name": "pls"})", R"({"name": "pls", "k": 2})"), "methods[1].k");
}

TEST(Config, BundledConfigsValidate) {
    int count = 0;
    for (const auto& e : fs::directory_iterator(PROJREG_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        const ExperimentConfig c = load_config(e.path().string());
        EXPECT_EQ(c.id, e.path().stem().string());
        EXPECT_FALSE(c.notes.empty()) << c.id;
        ++count;
    }
    EXPECT_EQ(count, 8);
    const ExperimentConfig left = load_config(std::string(PROJREG_CONFIG_DIR) + "/fig3_left.json");
    EXPECT_EQ(left.grid, (std::vector<double>{8, 16, 24, 32, 48, 56, 60, 64, 68, 72, 96, 128, 192, 256, 384, 512}));
    EXPECT_EQ(left.n, 64);
}

TEST(Table, CsvAndJsonlRoundTrip) {
    ResultTable t;
    ResultRow a;
    a.experiment_id = "x";
    a.model = "with,comma \"quoted\"";
    a.kind = "vary_k";
    a.method = "pca_ols";
    a.swept_variable = "k";
    a.swept_value = 3;
    a.k = 3;
    a.n = 20;
    a.p = 10;
    a.total = 0.1 + 0.2;
    a.bias_sq = 1.0 / 3.0;
    a.var_upper = std::numeric_limits<double>::infinity();
    a.mc_stderr = 1e-300;
    a.trials = 4;
    a.failed_trials = 1;
    ResultRow b = a;
    b.k.reset();
    b.total.reset();
    b.delta = 1e-6;
    b.ratio = -2.5e17;
    t.rows = {a, b};

    std::stringstream csv, jl;
    write_csv(csv, t);
    write_jsonl(jl, t);
    const std::string header = csv.str().substr(0, csv.str().find('\n'));
    EXPECT_EQ(header.rfind("schema_version,experiment_id,model,kind,method,swept_variable,swept_value,k,n,p,", 0), 0u);
    EXPECT_EQ(read_csv(csv), t);
    EXPECT_EQ(read_jsonl(jl), t);

    std::stringstream again;
    std::stringstream copy(csv.str());
    write_csv(again, read_csv(copy));
    EXPECT_EQ(again.str(), csv.str());
    std::stringstream bad("schema_version,nope\n");
    EXPECT_THROW(read_csv(bad), Error);
}

TEST(Runner, OneRowPerMethodAndGridPoint) {
    const ExperimentConfig c = validate_config(kSmall);
    const ResultTable t = run_experiment(c);
    ASSERT_EQ(t.rows.size(), 4u * 3u);
    for (const ResultRow& r : t.rows) {
        EXPECT_EQ(r.trials, 4);
        EXPECT_EQ(r.failed_trials, 0);
        EXPECT_TRUE(r.total);
        EXPECT_TRUE(r.mc_stderr);
        EXPECT_EQ(r.n, 20);
        EXPECT_EQ(r.p, 10);
        if (r.method == "pca_ols" || r.method == "truth") {
            ASSERT_TRUE(r.bias_sq && r.variance);
            EXPECT_GT(*r.noise, 0.0);
        }
        if (r.method == "pls") EXPECT_FALSE(r.bias_sq);
        if (r.method == "truth") EXPECT_FALSE(r.k);
    }
    EXPECT_EQ(t.rows[0].method, "pca_ols");
    EXPECT_EQ(t.rows[0].swept_value, 1.0);
    EXPECT_EQ(t.rows[3].method, "pls");
}

TEST(Runner, DeterministicAcrossWorkerCounts) {
    const ExperimentConfig c = validate_config(kSmall);
    const ResultTable a = run_experiment(c, {std::nullopt, 1u});
    const ResultTable b = run_experiment(c, {std::nullopt, 3u});
    EXPECT_EQ(a, b);
    const ResultTable other = run_experiment(c, {std::uint64_t{6}, std::nullopt});
    EXPECT_NE(a.rows[0].total, other.rows[0].total);
}

TEST(Runner, CommonRandomNumbersAcrossK) {
    // truth does not depend on k, so its rows must agree across the grid
    const ResultTable t = run_experiment(validate_config(kSmall));
    std::vector<double> truth;
    for (const auto& r : t.rows)
        if (r.method == "truth") truth.push_back(*r.total);
    ASSERT_EQ(truth.size(), 3u);
    EXPECT_EQ(truth[0], truth[1]);
    EXPECT_EQ(truth[1], truth[2]);
}

TEST(Runner, VaryPUsesTruncatedAmbientModel) {
    const std::string cfg = R"({"id": "vp", "kind": "vary_p", "n": 12, "grid": [4, 8, 16],
        "models": [{"covariance": {"kind": "wishart_gapped", "ambient": 16, "k_gap": 4}, "beta": {"snr": 2}}],
        "methods": [{"name": "pca_ols", "k": 6}, {"name": "truth"}, {"name": "null"}], "mc": {"trials": 3, "n_test": 16}})";
    const ExperimentConfig c = validate_config(cfg);
    const ResultTable t = run_experiment(c);
    ASSERT_EQ(t.rows.size(), 9u);
    EXPECT_EQ(*t.rows[0].k, 4);  // clamped to min(n, p)
    EXPECT_EQ(*t.rows[1].k, 6);
    EXPECT_EQ(t.rows[2].p, 16);

    CovarianceSpec cov;
    cov.kind = CovarianceKind::wishart_gapped;
    cov.ambient = 16;
    cov.k_gap = 4;
    cov.p = 16;
    BetaSpec beta;
    beta.snr = 2;
    const DataModel amb = build_ambient_model(cov, beta, 1);
    // null risk = beta^T C beta + sigma^2 for the truncated block
    for (int i = 0; i < 3; ++i) {
        const ResultRow& r = t.rows[6 + i];
        ASSERT_EQ(r.method, "null");
        const DataModel m = truncate_model(amb, r.p);
        EXPECT_NEAR(*r.bias_sq, m.signal_power(), 1e-9 * m.signal_power());
        EXPECT_EQ(*r.noise, amb.noise_variance());
    }
}

TEST(Runner, BoundsAndAttackColumns) {
    const std::string bo = R"({"id": "bo", "kind": "bounds_overlay", "n": 50, "p": 75, "grid": [8, 16, 20],
        "models": [{"covariance": {"kind": "gapped"}, "beta": {"snr": 16}}],
        "methods": [{"name": "pca_ols"}], "mc": {"trials": 3, "n_test": 16}})";
    const ResultTable t = run_experiment(validate_config(bo));
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& r : t.rows) {
        ASSERT_TRUE(r.var_lower && r.var_upper && r.bias_upper && r.bias_lower && r.bound_probability);
        EXPECT_NEAR(*r.bound_probability, 1.0 - std::exp(-3.0), 1e-15);
        EXPECT_FALSE(r.h);
    }
    EXPECT_TRUE(std::isfinite(*t.rows[1].var_upper));
    EXPECT_TRUE(std::isinf(*t.rows[2].var_upper));

    const std::string at = R"({"id": "at", "kind": "attack_sweep", "n": 16, "grid": [8, 32],
        "models": [{"covariance": {"kind": "gapped", "k_gap": 4}, "beta": {"snr": 4}}],
        "methods": [{"name": "ols"}, {"name": "pca_ols", "k": 4}], "attack": {"delta": 1e-6},
        "mc": {"trials": 3, "n_test": 64}})";
    const ResultTable a = run_experiment(validate_config(at));
    ASSERT_EQ(a.rows.size(), 4u);
    for (const auto& r : a.rows) {
        ASSERT_TRUE(r.ratio && r.mse_clean && r.mse_poisoned && r.h && r.epsilon && r.delta);
        EXPECT_EQ(*r.epsilon, 1.0);
        EXPECT_FALSE(r.var_upper);
    }
    EXPECT_EQ(*a.rows[0].delta, 0.0);  // p <= n uses the rank-one attack
    EXPECT_GT(*a.rows[1].ratio, 1e3);  // OLS, p > n
    EXPECT_LT(*a.rows[3].ratio, 2.0);  // PCA-OLS, p > n
}

TEST(Runner, SetupFailureIsFatalWithPartialOutput) {
    const std::string cfg = replace(kSmall, R"("beta": {"kind": "gaussian_iso", "snr": 4})",
                                    R"("beta": {"kind": "fixed", "fixed": [0,0,0,0,0,0,0,0,0,0], "norm": 1, "sigma": 1})");
    const RunOutcome r = execute(validate_config(cfg));
    EXPECT_FALSE(r.fatal.empty());
    EXPECT_TRUE(r.table.rows.empty());
    EXPECT_THROW(run_experiment(validate_config(cfg)), Error);
}

TEST(Cli, ExitCodesAndFiles) {
    const fs::path dir = temp_dir("cli");
    const fs::path good = dir / "small.json";
    std::ofstream(good) << kSmall;
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << replace(kSmall, "[1, 2, 3]", "[1, 1]");
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << replace(kSmall, R"("beta": {"kind": "gaussian_iso", "snr": 4})",
                                     R"("beta": {"kind": "fixed", "fixed": [0,0,0,0,0,0,0,0,0,0], "norm": 1, "sigma": 1})");

    EXPECT_EQ(run_cli("validate " + good.string()), 0);
    EXPECT_EQ(run_cli("validate " + bad.string()), 1);
    EXPECT_EQ(run_cli("validate " + (dir / "missing.json").string()), 1);
    EXPECT_EQ(run_cli("list-experiments"), 0);
    EXPECT_EQ(run_cli("validate fig3_left"), 0);
    EXPECT_EQ(run_cli("run " + bad.string() + " --out " + (dir / "o").string()), 1);
    EXPECT_EQ(run_cli("run " + good.string() + " --format xml"), 1);
    EXPECT_EQ(run_cli(""), 1);

    EXPECT_EQ(run_cli("run " + good.string() + " --out " + (dir / "a").string()), 0);
    EXPECT_EQ(run_cli("run " + good.string() + " --out " + (dir / "b").string() + " --workers 2"), 0);
    EXPECT_EQ(slurp(dir / "a" / "small.csv"), slurp(dir / "b" / "small.csv"));
    EXPECT_EQ(slurp(dir / "a" / "small.meta.json"), slurp(dir / "b" / "small.meta.json"));
    EXPECT_EQ(read_table((dir / "a" / "small.csv").string()).rows.size(), 12u);

    EXPECT_EQ(run_cli("run " + good.string() + " --out " + (dir / "j").string() + " --format jsonl --seed 9"), 0);
    const ResultTable jl = read_table((dir / "j" / "small.jsonl").string());
    EXPECT_EQ(jl.rows.size(), 12u);
    EXPECT_NE(jl.rows[0].total, read_table((dir / "a" / "small.csv").string()).rows[0].total);

    // runtime failures: exit 2, and whatever finished is still written
    EXPECT_EQ(run_cli("run " + broken.string() + " --out " + (dir / "r").string()), 2);
    EXPECT_TRUE(fs::exists(dir / "r" / "small.csv"));
    EXPECT_NE(slurp(dir / "r" / "small.meta.json").find("\"complete\": false"), std::string::npos);
    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(run_cli("run " + good.string() + " --out " + (dir / "blocker" / "sub").string()), 2);
    fs::remove_all(dir);
}
