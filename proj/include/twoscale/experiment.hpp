#pragma once

#include "twoscale/config.hpp"
#include "twoscale/orchestrator.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace twoscale {

struct SchemeMetrics {
    SchemeKind kind = SchemeKind::distributed;
    std::vector<double> sigma;  // percent, one per state
    double rmse = 0.0;          // percent
    double solve_seconds = 0.0;
    int mhe_nonconverged = 0;
    std::size_t messages = 0;
};

RunRecord run_experiment(const ExperimentConfig& cfg, std::span<const SchemeKind> kinds);
std::vector<SchemeMetrics> compute_metrics(const RunRecord& rec, const IndexOptions& opts = {});

/// Plain-text summary: resolved config (as '#' comments), then per-scheme
/// sigma per state, RMSE and solve time.
std::string format_summary(const ExperimentConfig& cfg, const RunRecord& rec, const std::vector<SchemeMetrics>& m);

/// Table with one column per scheme and rows sigma per state, RMSE, solve time.
std::string format_comparison(const std::vector<std::string>& state_names, const std::vector<SchemeMetrics>& m);

struct DecompositionReport {
    DecompositionCheck check;
    std::vector<double> sigma;
    double rmse = 0.0;
    /// Both fast temperatures predicted by V T + V_h T_j conservation.
    double conservation_fss = 0.0;
    double seconds = 0.0;
};

inline constexpr double kReferenceCompositeRmse = 0.035;
inline constexpr double kReferenceCompositeSigma[] = {0.44, 4.022, 1.8e-2, 0.15};
inline constexpr double kReferenceFastSteadyState = 309.167;

DecompositionReport run_decomposition_report(const ExperimentConfig& cfg);
/// time, truth:*, composite:*, slow:*, fast:* columns on the delta_f grid.
void export_decomposition_csv(const DecompositionReport& rep, const std::vector<std::string>& state_names,
                              const std::vector<std::string>& state_units, const std::filesystem::path& path);
std::string format_decomposition_report(const ExperimentConfig& cfg, const DecompositionReport& rep);

struct SweepEntry {
    int horizon = 0;
    std::uint64_t seed = 0;
    std::vector<SchemeMetrics> metrics;
};

/// One row per (N, seed, scheme): sigma per state and RMSE (no wall-clock, so reruns are byte-identical).
void export_sweep_csv(const std::vector<SweepEntry>& entries, const std::vector<std::string>& state_names,
                      const std::filesystem::path& path);

/// Runs the requested schemes for every (N, seed) pair; N applies to both MHEs.
std::vector<SweepEntry> run_sweep(const ExperimentConfig& cfg, const std::vector<int>& horizons,
                                  const std::vector<std::uint64_t>& seeds, std::span<const SchemeKind> kinds);

}  // namespace twoscale
