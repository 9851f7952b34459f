#include "twoscale/config.hpp"
#include "twoscale/csv.hpp"
#include "twoscale/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace twoscale;

namespace {

enum Exit { ok = 0, other = 1, config = 2, diverged = 3, nonconvergence = 4 };

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON experiment config (defaults apply to missing keys)");
    cmd->add_option("--seed", c.seed, "Noise seed (overrides the config)");
    cmd->add_option("--set", c.sets, "Override a config key, e.g. --set slow_mhe.horizon=5 (repeatable)")
        ->take_all();
    cmd->add_option("--out", c.out_dir, "Output directory (default: the config's 'output', i.e. out)");
}

ExperimentConfig load(const Common& c, const std::string& default_scenario) {
    std::optional<fs::path> file;
    if (!c.config_path.empty()) {
        if (!fs::exists(c.config_path)) throw ConfigError("config file not found: " + c.config_path);
        file = c.config_path;
    }
    return load_config(file, c.sets, c.seed, default_scenario);
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) {
    fs::path dir = c.out_dir.empty() ? fs::path(cfg.output) : fs::path(c.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
}

int cmd_simulate(const Common& c) {
    const auto cfg = load(c, "nominal");
    const SchemeKind kinds[] = {cfg.scheme};
    const RunRecord rec = run_experiment(cfg, kinds);
    const auto metrics = compute_metrics(rec, cfg.metrics);
    const auto dir = out_dir(c, cfg);
    export_csv(rec, dir / "simulate.csv");
    const std::string summary = format_summary(cfg, rec, metrics);
    write_text(dir / "simulate_summary.txt", summary);
    std::cout << summary;
    return ok;
}

int cmd_compare(const Common& c) {
    const auto cfg = load(c, "nominal");
    const RunRecord rec = run_experiment(cfg, kAllSchemes);
    const auto metrics = compute_metrics(rec, cfg.metrics);
    const auto dir = out_dir(c, cfg);
    export_csv(rec, dir / "compare.csv");
    const std::string table = format_comparison(rec.state_names, metrics);
    write_text(dir / "compare_summary.txt", format_summary(cfg, rec, metrics) + "\n" + table);
    std::cout << table;
    return ok;
}

int cmd_decompose_check(const Common& c) {
    const auto cfg = load(c, "decomposition");
    const auto rep = run_decomposition_report(cfg);
    const auto dir = out_dir(c, cfg);
    const auto sys = cstr::build_cstr(cfg.scenario.params);
    export_decomposition_csv(rep, sys.state_names, sys.state_units, dir / "decompose_check.csv");
    const std::string text = format_decomposition_report(cfg, rep);
    write_text(dir / "decompose_check_summary.txt", text);
    std::cout << text;
    return ok;
}

int cmd_sweep(const Common& c, const std::vector<int>& horizons, std::vector<std::uint64_t> seeds,
              const std::vector<std::string>& scheme_names) {
    const auto cfg = load(c, "nominal");
    if (seeds.empty()) seeds.push_back(cfg.scenario.seed);
    std::vector<SchemeKind> kinds;
    for (const auto& s : scheme_names) kinds.push_back(parse_scheme(s));
    if (kinds.empty()) kinds.assign(std::begin(kAllSchemes), std::end(kAllSchemes));
    const auto entries = run_sweep(cfg, horizons, seeds, kinds);
    const auto dir = out_dir(c, cfg);
    const std::vector<std::string> names = cstr::build_cstr(cfg.scenario.params).state_names;
    export_sweep_csv(entries, names, dir / "sweep.csv");
    std::string text;
    for (const auto& e : entries) {
        text += "N = " + std::to_string(e.horizon) + ", seed = " + std::to_string(e.seed) + "\n";
        text += format_comparison(names, e.metrics) + "\n";
    }
    write_text(dir / "sweep_summary.txt", text);
    std::cout << text;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed state estimation for two-time-scale systems (CSTR benchmark)"};
    app.require_subcommand(1);

    Common sim, cmp, dec, swp;
    auto* simulate = app.add_subcommand("simulate", "Run one scheme; write simulate.csv and simulate_summary.txt");
    add_common(simulate, sim);
    auto* compare = app.add_subcommand("compare", "Run schemes I/II/III on one seed; write a comparison table");
    add_common(compare, cmp);
    auto* decompose = app.add_subcommand("decompose-check", "Noise-free truth versus composite reconstruction");
    add_common(decompose, dec);
    auto* sweep = app.add_subcommand("sweep", "Repeat the comparison over MHE horizons (and seeds)");
    add_common(sweep, swp);
    std::vector<int> horizons{1, 2, 3, 5};
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> schemes;
    sweep->add_option("--horizons", horizons, "MHE horizons N")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", seeds, "Seeds (default: the config seed)")->delimiter(',');
    sweep->add_option("--schemes", schemes, "Schemes to run (default: all)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*compare) return cmd_compare(cmp);
        if (*decompose) return cmd_decompose_check(dec);
        if (*sweep) return cmd_sweep(swp, horizons, seeds, schemes);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config;
    } catch (const DivergedError& e) {
        std::cerr << "diverged at t = " << e.last_valid_time() << " s: " << e.what() << '\n';
        return diverged;
    } catch (const NonConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return nonconvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other;
    }
    return other;
}
