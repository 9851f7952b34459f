#pragma once

#include "twoscale/common.hpp"
#include "twoscale/decomposition.hpp"
#include "twoscale/ekf.hpp"
#include "twoscale/mhe.hpp"
#include "twoscale/model.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twoscale {

/// Fast period delta_f, slow period delta_s = n * delta_f, simulated horizon.
struct SamplingSchedule {
    double delta_f = 0.01;
    double delta_s = 0.1;
    int n = 10;
    double horizon = 5.0;

    void validate() const;
    long fast_steps() const;  // horizon / delta_f
    long slow_steps() const;  // horizon / delta_s
    std::vector<double> fast_grid() const;
    std::vector<double> slow_grid() const;
};

enum class SchemeKind { distributed, decentralized, centralized };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme(std::string_view name);
inline constexpr SchemeKind kAllSchemes[] = {SchemeKind::distributed, SchemeKind::decentralized,
                                             SchemeKind::centralized};

struct EkfTuning {
    Matrix Q;
    Matrix R;
    Matrix P0;
    EkfUpdateBase update_base = EkfUpdateBase::predicted;
};

struct MheTuning {
    int horizon = 3;
    Matrix Q;
    Matrix R;
    Matrix P;
    BoxBounds state_bounds;
    BoxBounds disturbance_bounds;
    BoxBounds noise_bounds;
    NlsSolverConfig solver;
};

/// Initial guesses; the fast guess covers only the fast-mapped components.
struct EstimatorGuesses {
    Vector centralized;
    Vector fast;
    Vector slow;
};

/// Everything needed to simulate one truth realization and run the schemes on it.
struct EstimationSetup {
    TwoTimeScaleSystem sys;
    FastStateMap fast_map;
    Vector x0;
    InputSignal inputs;
    SamplingSchedule schedule;
    NoiseSpec noise;
    /// Truth RK4 steps per delta_f; 0 picks enough steps for the local spectral radius.
    int truth_substeps = 1;

    EstimatorGuesses guesses;
    EkfTuning ekf;
    MheTuning slow_mhe;
    MheTuning central_mhe;
    double centralized_step = 0.01;
    FastSteadyStateOptions fast_steady_state;

    void validate() const;
};

/// Truth states and measurements on the delta_f grid.
struct TruthRecord {
    Trajectory states;
    Trajectory measurements;
};

/// Truth RK4 steps per fast period for a given request (0 = automatic).
int resolve_truth_substeps(const TwoTimeScaleSystem& sys, const Vector& x0, const Vector& u, double delta_f,
                           int requested);

/// Integrates the full model with zero-order-hold process noise (one draw per
/// RK4 step) and samples y = h(x) + v at every delta_f instant, t = 0 included.
TruthRecord simulate_truth(const EstimationSetup& setup);

enum class Node { fast, slow };
enum class MessageKind { mhe_estimate, open_loop_prediction };

/// Slow-to-fast transmission of x_s at fast instant q.
struct Message {
    long q = 0;
    double time = 0.0;
    Node from = Node::slow;
    Node to = Node::fast;
    MessageKind kind = MessageKind::mhe_estimate;
    Vector payload;
};

struct SchemeResult {
    SchemeKind kind = SchemeKind::distributed;
    Trajectory estimate;       // composite (schemes I, II) or full-model (III) estimate
    Trajectory slow_estimate;  // x^_s(tau_q); empty for III
    Trajectory fast_estimate;  // x^_f(tau_q); empty for III
    Vector x_fss;              // overlap value used by the f-EKF; empty for III
    std::vector<Message> messages;
    std::vector<long> mhe_instants;  // fast indices q at which an MHE was solved
    int mhe_nonconverged = 0;
    double solve_seconds = 0.0;
};

struct RunRecord {
    std::vector<std::string> state_names;
    std::vector<std::string> state_units;
    std::vector<std::string> output_names;
    std::vector<std::string> output_units;
    std::vector<std::string> fast_state_names;
    Trajectory truth;
    Trajectory measurements;
    std::vector<SchemeResult> schemes;

    const SchemeResult* find(SchemeKind kind) const;
};

SchemeResult estimate_distributed(const EstimationSetup& setup, const TruthRecord& truth);
SchemeResult estimate_decentralized(const EstimationSetup& setup, const TruthRecord& truth);
SchemeResult estimate_centralized(const EstimationSetup& setup, const TruthRecord& truth);
SchemeResult estimate(SchemeKind kind, const EstimationSetup& setup, const TruthRecord& truth);

/// Simulates the truth once and runs every requested scheme on it.
RunRecord run_schemes(const EstimationSetup& setup, std::span<const SchemeKind> kinds);
RunRecord run_distributed(const EstimationSetup& setup);
RunRecord run_decentralized(const EstimationSetup& setup);
RunRecord run_centralized(const EstimationSetup& setup);

/// Noise-free truth versus composite reconstruction from the derived subsystems.
struct DecompositionCheck {
    FastStateMap map;
    Vector x_fss;
    Trajectory truth;       // delta_f grid
    Trajectory fast;        // x_f(t / epsilon) on the delta_f grid
    Trajectory slow_coarse; // slow subsystem on the delta_s grid
    Trajectory slow;        // resampled onto the delta_f grid
    Trajectory composite;
    int truth_substeps = 1;
};

DecompositionCheck run_decomposition_check(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& x0,
                                           const InputSignal& inputs, const SamplingSchedule& schedule,
                                           int truth_substeps = 0, const FastSteadyStateOptions& fss = {});

}  // namespace twoscale
