#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "projreg/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace projreg;
using namespace projreg::harness;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

fs::path config_dir() {
    if (const char* env = std::getenv("PROJREG_CONFIG_DIR")) return env;
    return PROJREG_CONFIG_DIR;
}

// a path, or the id of a bundled config
std::string resolve_config(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    const fs::path bundled = config_dir() / (arg + ".json");
    if (fs::exists(bundled)) return bundled.string();
    return arg;
}

int cmd_validate(const std::string& path) {
    try {
        const ExperimentConfig c = load_config(resolve_config(path));
        std::cout << "ok " << c.id << " (" << to_string(c.kind) << ", " << c.models.size() << " model(s), " << c.methods.size()
                  << " method(s), " << c.grid.size() << " grid point(s))\n";
        return kOk;
    } catch (const Error& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return kInvalid;
    }
}

int cmd_list() {
    const fs::path dir = config_dir();
    if (!fs::is_directory(dir)) {
        std::cerr << "no config directory at " << dir << '\n';
        return kRuntime;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            const ExperimentConfig c = load_config(f.string());
            std::cout << c.id << '\t' << to_string(c.kind) << '\t' << c.description << '\n';
        } catch (const Error& e) {
            std::cout << f.stem().string() << "\t<invalid>\t" << e.what() << '\n';
        }
    }
    return kOk;
}

int cmd_run(const std::string& path, const std::string& out_dir, std::optional<std::uint64_t> seed, std::optional<unsigned> workers,
            const std::string& format) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(resolve_config(path));
    } catch (const Error& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return kInvalid;
    }
    const bool jsonl = format == "jsonl";
    RunOptions opts{seed, workers};
    RunOutcome r = execute(cfg, opts);
    try {
        fs::create_directories(out_dir);
        const fs::path table = fs::path(out_dir) / (cfg.output + (jsonl ? ".jsonl" : ".csv"));
        emit(r.table, table.string(), jsonl);
        const fs::path meta = fs::path(out_dir) / (cfg.output + ".meta.json");
        std::ofstream m(meta, std::ios::binary | std::ios::trunc);
        if (!m) fail(ErrorCode::Io, "cannot write " + meta.string());
        m << run_metadata(cfg, opts, r).dump(2) << '\n';
        std::cout << "wrote " << r.table.rows.size() << " row(s) to " << table.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    for (const auto& e : r.cell_errors) std::cerr << "cell failed: " << e << '\n';
    if (!r.fatal.empty()) {
        std::cerr << "error: run stopped after " << r.cells_done << " of " << r.cells_total << " cells: " << r.fatal << '\n';
        return kRuntime;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection-based linear regression experiments"};
    app.require_subcommand(1);

    std::string run_path, out_dir = ".", format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    auto* run = app.add_subcommand("run", "run an experiment config and write its table");
    run->add_option("config", run_path, "config file or bundled experiment id")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "master seed (overrides the config)");
    run->add_option("--workers", workers, "concurrent cells")->check(CLI::PositiveNumber);
    run->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "jsonl"}));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", validate_path, "config file or bundled experiment id")->required();

    auto* list = app.add_subcommand("list-experiments", "list the bundled experiment configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    if (*run) return cmd_run(run_path, out_dir, seed, workers, format);
    if (*validate) return cmd_validate(validate_path);
    if (*list) return cmd_list();
    return kInvalid;
}
