#include "twoscale/orchestrator.hpp"

#include "twoscale/integrate.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace twoscale {

// ---------------------------------------------------------------------------
// Schedule and setup
// ---------------------------------------------------------------------------

void SamplingSchedule::validate() const {
    if (!(delta_f > 0.0) || !(delta_s > 0.0) || !(horizon > 0.0)) {
        throw ConfigError("SamplingSchedule: delta_f, delta_s and horizon must be positive");
    }
    if (n < 1) throw ConfigError("SamplingSchedule: n must be a positive integer");
    if (std::abs(delta_s - n * delta_f) > 1e-12) {
        std::ostringstream msg;
        msg << "SamplingSchedule: delta_s = " << delta_s << " differs from n * delta_f = " << n * delta_f;
        throw ConfigError(msg.str());
    }
    const double ratio = horizon / delta_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("SamplingSchedule: horizon must be an integer multiple of delta_s");
    }
}

long SamplingSchedule::slow_steps() const { return std::lround(horizon / delta_s); }

long SamplingSchedule::fast_steps() const { return slow_steps() * n; }

std::vector<double> SamplingSchedule::fast_grid() const {
    std::vector<double> grid(static_cast<std::size_t>(fast_steps() + 1));
    for (std::size_t q = 0; q < grid.size(); ++q) grid[q] = static_cast<double>(q) * delta_f;
    return grid;
}

std::vector<double> SamplingSchedule::slow_grid() const {
    std::vector<double> grid(static_cast<std::size_t>(slow_steps() + 1));
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k) * delta_s;
    return grid;
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::distributed: return "distributed";
        case SchemeKind::decentralized: return "decentralized";
        case SchemeKind::centralized: return "centralized";
    }
    return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
    for (const auto kind : kAllSchemes) {
        if (name == to_string(kind)) return kind;
    }
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected distributed, decentralized or centralized)");
}

void EstimationSetup::validate() const {
    sys.validate();
    fast_map.validate(sys.n_x);
    require_size(x0, sys.n_x, "EstimationSetup: x0");
    schedule.validate();
    noise.validate(sys.n_x, sys.n_y);
    if (truth_substeps < 0) throw ConfigError("EstimationSetup: truth_substeps must be >= 0");
    require_size(guesses.centralized, sys.n_x, "EstimationSetup: centralized guess");
    require_size(guesses.slow, sys.n_x, "EstimationSetup: slow guess");
    require_size(guesses.fast, fast_map.size(), "EstimationSetup: fast guess");
    if (slow_mhe.horizon < 1 || central_mhe.horizon < 1) throw ConfigError("EstimationSetup: MHE horizon must be >= 1");
    if (!(centralized_step > 0.0)) throw ConfigError("EstimationSetup: centralized_step must be positive");
    const double ratio = centralized_step / schedule.delta_f;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
        throw ConfigError("EstimationSetup: centralized_step must be a positive multiple of delta_f");
    }
}

const SchemeResult* RunRecord::find(SchemeKind kind) const {
    for (const auto& s : schemes) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Truth
// ---------------------------------------------------------------------------

int resolve_truth_substeps(const TwoTimeScaleSystem& sys, const Vector& x0, const Vector& u, double delta_f,
                           int requested) {
    if (requested > 0) return requested;
    const double rho = spectral_radius(sys, x0, u);
    return std::max(1, static_cast<int>(std::ceil(delta_f * rho / 0.5)));
}

TruthRecord simulate_truth(const EstimationSetup& setup) {
    setup.validate();
    const auto& sys = setup.sys;
    const auto& sched = setup.schedule;
    const int substeps =
        resolve_truth_substeps(sys, setup.x0, setup.inputs.at(0.0), sched.delta_f, setup.truth_substeps);

    NoiseGenerator noise(setup.noise);
    const OdeRhs rhs = [&](double t, const Vector& x) { return eval_full_rhs(sys, x, setup.inputs.at(t)); };
    StepperConfig cfg;
    cfg.step = sched.delta_f / substeps;
    cfg.record_every = substeps;
    cfg.max_state_norm = 1e6;

    TruthRecord rec;
    rec.states = integrate(rhs, setup.x0, 0.0, static_cast<double>(sched.fast_steps()) * sched.delta_f, cfg,
                           setup.noise.process_std.isZero() ? nullptr : &noise);
    // Re-stamp on the exact delta_f grid.
    rec.states.times = sched.fast_grid();
    for (std::size_t q = 0; q < rec.states.size(); ++q) {
        rec.measurements.push_back(rec.states.times[q], sys.h(rec.states.states[q]) + noise.measurement());
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Schemes
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

class StopWatch {
public:
    void start() { began_ = Clock::now(); }
    void stop() { total_ += std::chrono::duration<double>(Clock::now() - began_).count(); }
    double seconds() const noexcept { return total_; }

private:
    Clock::time_point began_{};
    double total_ = 0.0;
};

MheProblem make_problem(const MheTuning& tuning, const Vector& prior) {
    return make_mhe_problem(tuning.horizon, prior, tuning.P, tuning.Q, tuning.R, tuning.state_bounds,
                            tuning.disturbance_bounds, tuning.noise_bounds);
}

SchemeResult run_decomposed(const EstimationSetup& setup, const TruthRecord& truth, bool exchange) {
    setup.validate();
    const auto& sys = setup.sys;
    const auto& sched = setup.schedule;
    const auto& map = setup.fast_map;

    SchemeResult out;
    out.kind = exchange ? SchemeKind::distributed : SchemeKind::decentralized;

    // Initialization: fast steady state reached from the f-EKF guess; the
    // slow prior is the s-MHE guess moved onto that overlap value.
    Vector frozen = setup.guesses.slow;
    map.scatter(frozen, setup.guesses.fast);
    const FastSubsystem fast0 = derive_fast(sys, map, frozen);
    out.x_fss = fast_steady_state(fast0, setup.guesses.fast, setup.fast_steady_state);
    Vector slow_prior = setup.guesses.slow;
    map.scatter(slow_prior, out.x_fss);
    const Vector severed_slow_info = slow_prior;

    const SlowSubsystem slow = derive_slow(sys);
    const DiscreteModel slow_model = [&](const Vector& x, const Vector& u) {
        return rk4_step([&](double, const Vector& xi) { return slow.rhs(xi, u); }, 0.0, x, sched.delta_s);
    };

    EkfState ekf = make_ekf_state(setup.guesses.fast, setup.ekf.P0, setup.ekf.Q, setup.ekf.R);
    MheProblem mhe = make_problem(setup.slow_mhe, slow_prior);
    const double dt_tau = sched.delta_f / sys.epsilon;

    StopWatch watch;
    Vector xs_hat = slow_prior;
    const long steps = static_cast<long>(truth.states.size());
    for (long q = 0; q < steps; ++q) {
        const double t = truth.states.times[static_cast<std::size_t>(q)];
        const Vector& y = truth.measurements.states[static_cast<std::size_t>(q)];
        watch.start();

        MessageKind kind;
        if (q % sched.n == 0) {
            const long k = q / sched.n;
            const Vector& u_prev = setup.inputs.at(k > 0 ? t - sched.delta_s : 0.0);
            mhe_advance(mhe, y, u_prev);
            const MheSolution sol = mhe_solve(mhe, slow_model, sys.h, setup.slow_mhe.solver);
            if (!sol.converged()) ++out.mhe_nonconverged;
            xs_hat = sol.estimate();
            out.mhe_instants.push_back(q);
            kind = MessageKind::mhe_estimate;
        } else {
            const Vector& u = setup.inputs.at(t - sched.delta_f);
            xs_hat = rk4_step([&](double, const Vector& xi) { return slow.rhs(xi, u); }, 0.0, xs_hat, sched.delta_f);
            kind = MessageKind::open_loop_prediction;
        }
        if (!xs_hat.allFinite()) throw DivergedError("slow estimate diverged", t);

        const Vector& xs_info = exchange ? xs_hat : severed_slow_info;
        if (exchange) out.messages.push_back(Message{q, t, Node::slow, Node::fast, kind, xs_hat});

        if (q > 0) {
            const FastSubsystem fast = derive_fast(sys, map, xs_info);
            ekf = ekf_predict(std::move(ekf), fast.as_field(), dt_tau);
        }
        ekf = ekf_update(std::move(ekf), y, xs_info, out.x_fss, map, sys.h, setup.ekf.update_base);
        watch.stop();

        out.slow_estimate.push_back(t, xs_hat);
        out.fast_estimate.push_back(t, ekf.x_hat);
        out.estimate.push_back(t, composite_point(xs_hat, ekf.x_hat, out.x_fss, map));
    }
    out.solve_seconds = watch.seconds();
    return out;
}

}  // namespace

SchemeResult estimate_distributed(const EstimationSetup& setup, const TruthRecord& truth) {
    return run_decomposed(setup, truth, true);
}

SchemeResult estimate_decentralized(const EstimationSetup& setup, const TruthRecord& truth) {
    return run_decomposed(setup, truth, false);
}

SchemeResult estimate_centralized(const EstimationSetup& setup, const TruthRecord& truth) {
    setup.validate();
    const auto& sys = setup.sys;
    const auto& sched = setup.schedule;
    const double step = setup.centralized_step;
    const long stride = std::lround(step / sched.delta_f);

    const double rho = spectral_radius(sys, setup.guesses.centralized, setup.inputs.at(0.0));
    if (step * rho > kRk4RealStabilityBound) {
        std::ostringstream msg;
        msg << "centralized MHE: sampling step " << step << " s exceeds the explicit stability limit "
            << kRk4RealStabilityBound / rho << " s of the stiff full model (spectral radius " << rho << ")";
        throw DivergedError(msg.str(), 0.0);
    }

    SchemeResult out;
    out.kind = SchemeKind::centralized;
    const DiscreteModel model = [&](const Vector& x, const Vector& u) {
        return rk4_step([&](double, const Vector& xi) { return eval_full_rhs(sys, xi, u); }, 0.0, x, step);
    };
    MheProblem mhe = make_problem(setup.central_mhe, setup.guesses.centralized);

    StopWatch watch;
    Vector x_hat = setup.guesses.centralized;
    const long steps = static_cast<long>(truth.states.size());
    for (long q = 0; q < steps; ++q) {
        const double t = truth.states.times[static_cast<std::size_t>(q)];
        if (q % stride == 0) {
            watch.start();
            const Vector& u_prev = setup.inputs.at(q > 0 ? t - step : 0.0);
            mhe_advance(mhe, truth.measurements.states[static_cast<std::size_t>(q)], u_prev);
            MheSolution sol;
            try {
                sol = mhe_solve(mhe, model, sys.h, setup.central_mhe.solver);
            } catch (const NumericalError& e) {
                throw DivergedError(std::string("centralized MHE: shooting diverged (stiff full model): ") + e.what(), t);
            }
            watch.stop();
            if (!sol.converged()) ++out.mhe_nonconverged;
            x_hat = sol.estimate();
            if (!x_hat.allFinite() || x_hat.norm() > 1e6) {
                throw DivergedError("centralized MHE: estimate diverged (stiff full model)", t);
            }
            out.mhe_instants.push_back(q);
        }
        out.estimate.push_back(t, x_hat);
    }
    out.solve_seconds = watch.seconds();
    return out;
}

SchemeResult estimate(SchemeKind kind, const EstimationSetup& setup, const TruthRecord& truth) {
    switch (kind) {
        case SchemeKind::distributed: return estimate_distributed(setup, truth);
        case SchemeKind::decentralized: return estimate_decentralized(setup, truth);
        case SchemeKind::centralized: return estimate_centralized(setup, truth);
    }
    throw ConfigError("unknown scheme");
}

RunRecord run_schemes(const EstimationSetup& setup, std::span<const SchemeKind> kinds) {
    const TruthRecord truth = simulate_truth(setup);
    RunRecord rec;
    rec.state_names = setup.sys.state_names;
    rec.state_units = setup.sys.state_units;
    rec.output_names = setup.sys.output_names;
    rec.output_units = setup.sys.output_units;
    for (const auto i : setup.fast_map.indices) {
        rec.fast_state_names.push_back(static_cast<std::size_t>(i) < rec.state_names.size()
                                           ? rec.state_names[static_cast<std::size_t>(i)]
                                           : "x" + std::to_string(i + 1));
    }
    rec.truth = truth.states;
    rec.measurements = truth.measurements;
    for (const auto kind : kinds) rec.schemes.push_back(estimate(kind, setup, truth));
    return rec;
}

RunRecord run_distributed(const EstimationSetup& setup) {
    const SchemeKind k[] = {SchemeKind::distributed};
    return run_schemes(setup, k);
}

RunRecord run_decentralized(const EstimationSetup& setup) {
    const SchemeKind k[] = {SchemeKind::decentralized};
    return run_schemes(setup, k);
}

RunRecord run_centralized(const EstimationSetup& setup) {
    const SchemeKind k[] = {SchemeKind::centralized};
    return run_schemes(setup, k);
}

// ---------------------------------------------------------------------------
// Decomposition check
// ---------------------------------------------------------------------------

DecompositionCheck run_decomposition_check(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& x0,
                                           const InputSignal& inputs, const SamplingSchedule& schedule,
                                           int truth_substeps, const FastSteadyStateOptions& fss) {
    sys.validate();
    schedule.validate();
    DecompositionCheck out;
    out.map = map;

    const SubsystemPair pair = decompose(sys, map, x0, fss);
    out.x_fss = pair.x_fss;

    const auto grid = schedule.fast_grid();
    const double t_end = grid.back();

    // Truth (noise-free).
    out.truth_substeps = resolve_truth_substeps(sys, x0, inputs.at(0.0), schedule.delta_f, truth_substeps);
    StepperConfig truth_cfg;
    truth_cfg.step = schedule.delta_f / out.truth_substeps;
    truth_cfg.record_every = out.truth_substeps;
    out.truth = integrate([&](double t, const Vector& x) { return eval_full_rhs(sys, x, inputs.at(t)); }, x0, 0.0,
                          t_end, truth_cfg);
    out.truth.times = grid;

    // Inner solution at tau = t / epsilon.
    out.fast = fast_trajectory(pair.fast, map.extract(x0), grid, sys.epsilon);

    // Outer solution from x_s0 = x_fss on the slow grid, then resampled.
    StepperConfig slow_cfg;
    slow_cfg.step = schedule.delta_s;
    out.slow_coarse = integrate([&](double t, const Vector& x) { return pair.slow.rhs(x, inputs.at(t)); },
                                pair.slow_initial_state(x0), 0.0, t_end, slow_cfg);
    out.slow_coarse.times = schedule.slow_grid();
    out.slow = resample_cubic(out.slow_coarse, grid);

    out.composite = composite(out.fast, out.slow, out.x_fss, map);
    return out;
}

}  // namespace twoscale
