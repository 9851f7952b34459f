#include "twoscale/experiment.hpp"

#include "twoscale/csv.hpp"
#include "twoscale/metrics.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace twoscale {

RunRecord run_experiment(const ExperimentConfig& cfg, std::span<const SchemeKind> kinds) {
    return run_schemes(cstr::make_setup(cfg.scenario), kinds);
}

std::vector<SchemeMetrics> compute_metrics(const RunRecord& rec, const IndexOptions& opts) {
    std::vector<SchemeMetrics> out;
    for (const auto& s : rec.schemes) {
        SchemeMetrics m;
        m.kind = s.kind;
        for (Eigen::Index i = 0; i < rec.truth.dim(); ++i) m.sigma.push_back(sigma_index(s.estimate, rec.truth, i, opts));
        m.rmse = rmse_index(s.estimate, rec.truth, opts);
        m.solve_seconds = s.solve_seconds;
        m.mhe_nonconverged = s.mhe_nonconverged;
        m.messages = s.messages.size();
        out.push_back(std::move(m));
    }
    return out;
}

namespace {

void echo_config(std::ostream& out, const Json& resolved) {
    std::istringstream lines(resolved.dump(2));
    std::string line;
    out << "# resolved configuration\n";
    while (std::getline(lines, line)) out << "# " << line << '\n';
}

std::string scheme_title(SchemeKind k) {
    switch (k) {
        case SchemeKind::distributed: return "I distributed";
        case SchemeKind::decentralized: return "II decentralized";
        case SchemeKind::centralized: return "III centralized";
    }
    return "";
}

}  // namespace

std::string format_summary(const ExperimentConfig& cfg, const RunRecord& rec, const std::vector<SchemeMetrics>& m) {
    std::ostringstream out;
    echo_config(out, cfg.resolved);
    out << "# indexes exclude the first sample: " << (cfg.metrics.skip_first ? "yes" : "no") << '\n';
    out << std::setprecision(6);
    for (const auto& s : m) {
        out << "scheme " << to_string(s.kind) << '\n';
        for (std::size_t i = 0; i < s.sigma.size(); ++i) {
            out << "  sigma_" << rec.state_names[i] << " [%] = " << s.sigma[i] << '\n';
        }
        out << "  RMSE [%] = " << s.rmse << '\n';
        out << "  solve time [s] = " << s.solve_seconds << '\n';
        out << "  MHE non-converged windows = " << s.mhe_nonconverged << '\n';
        out << "  slow-to-fast messages = " << s.messages << '\n';
    }
    return out.str();
}

std::string format_comparison(const std::vector<std::string>& state_names, const std::vector<SchemeMetrics>& m) {
    std::ostringstream out;
    out << std::left << std::setw(22) << "metric";
    for (const auto& s : m) out << std::right << std::setw(20) << scheme_title(s.kind);
    out << '\n';
    auto row = [&](const std::string& name, auto value) {
        out << std::left << std::setw(22) << name;
        for (const auto& s : m) out << std::right << std::setw(20) << std::setprecision(6) << value(s);
        out << '\n';
    };
    for (std::size_t i = 0; i < state_names.size(); ++i) {
        row("sigma_" + state_names[i] + " [%]", [i](const SchemeMetrics& s) { return s.sigma[i]; });
    }
    row("RMSE [%]", [](const SchemeMetrics& s) { return s.rmse; });
    row("solve time [s]", [](const SchemeMetrics& s) { return s.solve_seconds; });
    return out.str();
}

DecompositionReport run_decomposition_report(const ExperimentConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto t0 = std::chrono::steady_clock::now();
    DecompositionReport rep;
    const TwoTimeScaleSystem sys = cstr::build_cstr(sc.params);
    rep.check = run_decomposition_check(sys, cstr::fast_map(), sc.x0, InputSignal::constant(sc.u), sc.schedule,
                                        sc.truth_substeps);
    for (Eigen::Index i = 0; i < sys.n_x; ++i) {
        rep.sigma.push_back(sigma_index(rep.check.composite, rep.check.truth, i, cfg.metrics));
    }
    rep.rmse = rmse_index(rep.check.composite, rep.check.truth, cfg.metrics);
    rep.conservation_fss = cstr::fast_steady_temperature(sc.params, sc.x0(cstr::T), sc.x0(cstr::T_j));
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string format_decomposition_report(const ExperimentConfig& cfg, const DecompositionReport& rep) {
    std::ostringstream out;
    echo_config(out, cfg.resolved);
    out << std::setprecision(10);
    out << "fast steady state (flow limit) = [" << rep.check.x_fss(0) << ", " << rep.check.x_fss(1) << "] K\n";
    out << "fast steady state (conservation V T + V_h T_j) = " << rep.conservation_fss << " K\n";
    out << "fast steady state (reference) = " << kReferenceFastSteadyState << " K\n";
    out << "truth RK4 substeps per delta_f = " << rep.check.truth_substeps << '\n';
    out << std::setprecision(6);
    const std::vector<std::string> names = {"C_A", "C_B", "T", "T_j"};
    for (std::size_t i = 0; i < rep.sigma.size(); ++i) {
        out << "sigma_" << (i < names.size() ? names[i] : std::to_string(i)) << " [%] = " << rep.sigma[i];
        if (i < std::size(kReferenceCompositeSigma)) out << "  (reference " << kReferenceCompositeSigma[i] << ")";
        out << '\n';
    }
    out << "composite RMSE [%] = " << rep.rmse << "  (reference " << kReferenceCompositeRmse << ")\n";
    out << "elapsed [s] = " << rep.seconds << '\n';
    return out.str();
}

std::vector<SweepEntry> run_sweep(const ExperimentConfig& cfg, const std::vector<int>& horizons,
                                  const std::vector<std::uint64_t>& seeds, std::span<const SchemeKind> kinds) {
    std::vector<SweepEntry> out;
    for (const int n : horizons) {
        if (n < 1) throw ConfigError("sweep: horizons must be >= 1");
        for (const auto seed : seeds) {
            cstr::Scenario sc = cfg.scenario;
            sc.slow_mhe.horizon = n;
            sc.central_mhe.horizon = n;
            sc.seed = seed;
            const RunRecord rec = run_schemes(cstr::make_setup(sc), kinds);
            out.push_back({n, seed, compute_metrics(rec, cfg.metrics)});
        }
    }
    return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

void export_decomposition_csv(const DecompositionReport& rep, const std::vector<std::string>& state_names,
                              const std::vector<std::string>& state_units, const std::filesystem::path& path) {
    const auto& c = rep.check;
    std::vector<std::string> header{"time [s]"};
    for (const char* prefix : {"truth", "composite", "slow"}) {
        for (std::size_t i = 0; i < state_names.size(); ++i) {
            header.push_back(std::string(prefix) + ":" + state_names[i] + " [" + state_units[i] + "]");
        }
    }
    for (const auto idx : c.map.indices) {
        const auto i = static_cast<std::size_t>(idx);
        header.push_back("fast:" + state_names[i] + " [" + state_units[i] + "]");
    }
    auto out = open_output(path);
    out << csv_record(header) << "\r\n";
    std::vector<std::string> row;
    for (std::size_t j = 0; j < c.truth.size(); ++j) {
        row.assign(1, format_double(c.truth.times[j]));
        for (const Trajectory* t : {&c.truth, &c.composite, &c.slow, &c.fast}) {
            for (Eigen::Index i = 0; i < t->states[j].size(); ++i) row.push_back(format_double(t->states[j](i)));
        }
        out << csv_record(row) << "\r\n";
    }
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

void export_sweep_csv(const std::vector<SweepEntry>& entries, const std::vector<std::string>& state_names,
                      const std::filesystem::path& path) {
    std::vector<std::string> header{"horizon", "seed", "scheme"};
    for (const auto& n : state_names) header.push_back("sigma_" + n + " [%]");
    header.push_back("RMSE [%]");
    auto out = open_output(path);
    out << csv_record(header) << "\r\n";
    for (const auto& e : entries) {
        for (const auto& m : e.metrics) {
            std::vector<std::string> row{std::to_string(e.horizon), std::to_string(e.seed), std::string(to_string(m.kind))};
            for (const double s : m.sigma) row.push_back(format_double(s));
            row.push_back(format_double(m.rmse));
            out << csv_record(row) << "\r\n";
        }
    }
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace twoscale
