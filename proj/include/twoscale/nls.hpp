#pragma once

#include "twoscale/common.hpp"

#include <vector>

namespace twoscale {

struct NlsSolverConfig {
    int max_iters = 200;
    /// Absolute bound on ||x - P(x - grad)||_inf of 0.5 * ||r||^2.
    double grad_tol = 1e-5;
    /// Relative step size below which the iteration stops.
    double step_tol = 1e-12;
    /// Relative cost decrease of an accepted step below which the iteration stops.
    double cost_tol = 1e-12;
    /// Initial Levenberg-Marquardt damping (scaled by diag(J^T J)).
    double damping_init = 1e-3;

    void validate() const;
};

enum class NlsStatus {
    gradient_converged,  // projected gradient below grad_tol
    cost_converged,      // accepted step reduced the cost by less than cost_tol (relative)
    step_converged,      // step below step_tol
    stalled,             // damping exhausted without a decrease, gradient above tol
    max_iterations,
};

struct NlsResult {
    Vector x;
    double cost = 0.0;  // 0.5 * ||r(x)||^2
    int iterations = 0;
    double projected_gradient = 0.0;
    NlsStatus status = NlsStatus::max_iterations;
    /// Cost after every accepted step, starting with the initial cost.
    std::vector<double> accepted_costs;

    /// Only a projected-gradient certificate counts as convergence.
    bool converged() const noexcept { return status == NlsStatus::gradient_converged; }
};

using ResidualFn = std::function<Vector(const Vector&)>;

/// Box-constrained nonlinear least squares, min 0.5 ||r(x)||^2 s.t. lower <= x <= upper,
/// by Levenberg-Marquardt with central-difference Jacobians; trial points are
/// projected onto the box and accepted only when the cost does not increase.
/// Infinite bounds are allowed. Throws ConfigError when lower > upper.
NlsResult solve_bounded_least_squares(const ResidualFn& residual, Vector x0, const Vector& lower,
                                      const Vector& upper, const NlsSolverConfig& cfg = {});

/// ||x - P(x - g)||_inf for the box [lower, upper].
double projected_gradient_norm(const Vector& x, const Vector& gradient, const Vector& lower, const Vector& upper);

}  // namespace twoscale
