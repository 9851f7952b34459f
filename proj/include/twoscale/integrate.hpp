#pragma once

#include "twoscale/common.hpp"
#include "twoscale/model.hpp"

namespace twoscale {

enum class StepMethod { rk4, euler };

struct StepperConfig {
    StepMethod method = StepMethod::rk4;
    double step = 0.01;
    double max_state_norm = 1e6;
    /// Store every `record_every`-th step; 1 keeps the dense trajectory.
    int record_every = 1;

    void validate() const;
};

/// One explicit step of `rhs` from (t, x) with `disturbance` held constant.
Vector explicit_step(StepMethod method, const OdeRhs& rhs, double t, const Vector& x, double h,
                     const Vector* disturbance = nullptr);

inline Vector rk4_step(const OdeRhs& rhs, double t, const Vector& x, double h) {
    return explicit_step(StepMethod::rk4, rhs, t, x, h);
}

/// Fixed-step integration over [t0, t1]. The step must divide the span to
/// within 1e-12. When `noise` is given, one process-noise sample is drawn
/// per step and added to the right-hand side for that step.
///
/// Throws DivergedError (carrying the last valid time) when the state becomes
/// non-finite or its norm exceeds cfg.max_state_norm.
Trajectory integrate(const OdeRhs& rhs, const Vector& x0, double t0, double t1, const StepperConfig& cfg,
                     NoiseGenerator* noise = nullptr);

/// Ratio of the largest to the smallest nonzero |Re(lambda)| of the full
/// right-hand side Jacobian at (x, u). Returns 1 for a scalar system or when
/// fewer than two nonzero real parts exist.
double stiffness_probe(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u);

/// Largest |lambda| of the full right-hand side Jacobian at (x, u).
double spectral_radius(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u);

/// Real-axis stability bound of classic RK4 (|lambda| h below this is stable).
inline constexpr double kRk4RealStabilityBound = 2.785293563405282;

}  // namespace twoscale
