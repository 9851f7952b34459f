#pragma once

#include "twoscale/common.hpp"
#include "twoscale/model.hpp"

#include <vector>

namespace twoscale {

/// Full-state indices whose dynamics appear in the fast subsystem.
struct FastStateMap {
    std::vector<Eigen::Index> indices;

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(indices.size()); }

    /// Indices distinct and within [0, n_x). Throws ConfigError.
    void validate(Eigen::Index n_x) const;

    Vector extract(const Vector& full) const;
    void scatter(Vector& full, const Vector& fast) const;
    bool contains(Eigen::Index i) const;
};

/// Indices of the rows of b(x) that are not numerically zero.
FastStateMap fast_map_from_b(const TwoTimeScaleSystem& sys, const Vector& x, double tol = 1e-12);

/// Boundary-layer subsystem dx_f/dtau = b(x) k(x), restricted to the mapped
/// components. Components outside the map are frozen at `frozen`.
class FastSubsystem {
public:
    FastSubsystem(TwoTimeScaleSystem sys, FastStateMap map, Vector frozen);

    Vector operator()(const Vector& xf) const;
    /// Full state with the mapped components replaced by `xf`.
    Vector embed(const Vector& xf) const;
    /// k evaluated at embed(xf).
    Vector constraint(const Vector& xf) const;
    /// dk/dx restricted to the mapped columns, at embed(xf).
    Matrix constraint_jacobian(const Vector& xf) const;
    /// Rows of b(x) for the mapped components, at embed(xf).
    Matrix fast_directions(const Vector& xf) const;

    VectorField as_field() const;

    const FastStateMap& map() const noexcept { return map_; }
    const Vector& frozen() const noexcept { return frozen_; }
    const TwoTimeScaleSystem& system() const noexcept { return sys_; }

private:
    TwoTimeScaleSystem sys_;
    FastStateMap map_;
    Vector frozen_;
};

/// Fast subsystem around `frozen`. Throws ConfigError when a nonzero row of
/// b(frozen) lies outside the map.
FastSubsystem derive_fast(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& frozen);

/// Algebraic variable of the reduced system after one differentiation of
/// k(x_s) = 0:  z = -[L_b k]^{-1} (L_f k + L_g k u).
/// Throws NumericalError when L_b k is singular (index above two or rank loss).
Vector solve_z(const TwoTimeScaleSystem& sys, const Vector& xs, const Vector& u);

/// Reduced slow subsystem dx_s/dt = f + g u + b z(x_s, u) on k(x_s) = 0.
class SlowSubsystem {
public:
    explicit SlowSubsystem(TwoTimeScaleSystem sys);

    Vector rhs(const Vector& xs, const Vector& u) const;
    Vector constraint(const Vector& xs) const;
    Vector z(const Vector& xs, const Vector& u) const;

    const TwoTimeScaleSystem& system() const noexcept { return sys_; }

private:
    TwoTimeScaleSystem sys_;
};

SlowSubsystem derive_slow(const TwoTimeScaleSystem& sys);

struct FastSteadyStateOptions {
    double tol = 1e-10;           // on ||dx_f/dtau||
    double horizon_factor = 50.0; // tau_max = factor * slowest fast time constant
    double step_fraction = 0.1;   // tau step = fraction / spectral radius
    int newton_iterations = 20;
};

/// Limit of the fast flow from `xf0`: integrate in tau until the field norm
/// drops below tol, then Newton-polish k = 0 together with the linear
/// invariants c^T x_f = c^T x_f0 (c^T b_f = 0) of the flow.
/// Throws NonConvergenceError when tau_max is reached.
Vector fast_steady_state(const FastSubsystem& fast, const Vector& xf0, const FastSteadyStateOptions& opts = {});

/// Derived fast/slow pair with the overlap value x_fss.
struct SubsystemPair {
    FastSubsystem fast;
    SlowSubsystem slow;
    Vector x_fss;

    const FastStateMap& map() const noexcept { return fast.map(); }
    /// x0 with the fast components replaced by x_fss.
    Vector slow_initial_state(const Vector& x0) const;
};

/// Decomposes `sys` around `x0`; x_fss is reached from the fast components of x0.
SubsystemPair decompose(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& x0,
                        const FastSteadyStateOptions& opts = {});

/// Fast-subsystem trajectory sampled on `t_grid` at tau = t / epsilon, using
/// RK4 sub-steps of at most `max_tau_step` (0 picks 0.1 / spectral radius).
Trajectory fast_trajectory(const FastSubsystem& fast, const Vector& xf0, const std::vector<double>& t_grid,
                           double epsilon, double max_tau_step = 0.0);

/// Matched composite x_cp = x_f + x_s - x_fss on the mapped components and
/// x_s elsewhere. Both trajectories must share the same time grid.
Trajectory composite(const Trajectory& fast, const Trajectory& slow, const Vector& x_fss, const FastStateMap& map);

/// Not-a-knot cubic spline through strictly increasing knots (linear for two
/// knots, the interpolating parabola for three).
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    double lower() const noexcept { return x_.front(); }
    double upper() const noexcept { return x_.back(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_;
};

/// Componentwise cubic-spline resampling onto `target_grid`.
/// Throws ConfigError when a target point lies outside the source span.
Trajectory resample_cubic(const Trajectory& traj, const std::vector<double>& target_grid);

}  // namespace twoscale
