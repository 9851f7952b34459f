#pragma once

#include "twoscale/common.hpp"
#include "twoscale/nls.hpp"

#include <deque>
#include <map>
#include <optional>

namespace twoscale {

/// Componentwise interval set; infinite entries allowed.
struct BoxBounds {
    Vector lower;
    Vector upper;

    static BoxBounds unbounded(Eigen::Index n);
    static BoxBounds symmetric(Eigen::Index n, double half_width);

    Eigen::Index size() const noexcept { return lower.size(); }
    void validate(Eigen::Index n, const char* what) const;
    /// Signed distance outside the box per component (0 inside).
    Vector violation(const Vector& x) const;
};

/// Discrete-time stage model x_{j+1} = F(x_j, u_j) (+ w_j).
using DiscreteModel = std::function<Vector(const Vector&, const Vector&)>;

/// Moving-horizon estimation problem
///
///   min ||x_0 - x~||^2_{P^-1} + sum ||w_j||^2_{Q^-1} + sum ||y_j - h(x_j)||^2_{R^-1}
///   s.t. x_{j+1} = F(x_j, u_j) + w_j,  x in X, w in W, v in V
///
/// over a window of at most N+1 measurements. Single shooting in
/// (x_0, w_0..w_{M-1}); bounds on x_0 and w are enforced by projection,
/// bounds on the propagated states and on v by an exact quadratic penalty.
struct MheProblem {
    int horizon = 0;  // N
    Matrix P;         // arrival-cost covariance
    Matrix Q;         // disturbance weighting covariance
    Matrix R;         // measurement weighting covariance
    BoxBounds state_bounds;
    BoxBounds disturbance_bounds;
    BoxBounds noise_bounds;
    double penalty_weight = 1e6;

    Vector prior;  // x~ at the window start
    std::deque<Vector> measurements;  // y(start) .. y(end)
    std::deque<Vector> inputs;        // u(start) .. u(end - 1)
    long start_index = 0;

    /// Window-end estimates x^(j|j), kept while they can still become a prior.
    std::map<long, Vector> filtered;

    Eigen::Index state_dim() const noexcept { return prior.size(); }
    long end_index() const noexcept { return start_index + static_cast<long>(measurements.size()) - 1; }
    bool full() const noexcept { return static_cast<int>(measurements.size()) == horizon + 1; }

    void validate() const;
};

MheProblem make_mhe_problem(int horizon, Vector prior, Matrix P, Matrix Q, Matrix R, BoxBounds state_bounds,
                            BoxBounds disturbance_bounds, BoxBounds noise_bounds);

struct MheSolution {
    std::vector<Vector> x;  // x^(start) .. x^(end)
    std::vector<Vector> w;  // w^(start) .. w^(end - 1)
    std::vector<Vector> v;  // v^(start) .. v^(end)
    double cost = 0.0;      // value of the weighted objective (without penalties)
    NlsResult solver;

    bool converged() const noexcept { return solver.converged(); }
    const Vector& estimate() const { return x.back(); }
};

/// Appends measurement y_new. `u_prev` is the input held over the interval
/// that ends at y_new (ignored for the very first measurement). Before the
/// window holds N+1 measurements the window grows; afterwards it shifts and
/// the prior becomes the stored estimate x^(start|start).
/// Throws Error when a shift needs an estimate that was never produced.
void mhe_advance(MheProblem& pb, const Vector& y_new, const Vector& u_prev);

/// Solves the current window and records its end estimate as x^(end|end).
MheSolution mhe_solve(MheProblem& pb, const DiscreteModel& model, const VectorField& h,
                      const NlsSolverConfig& cfg = {});

/// Objective value of a window trajectory defined by (x0, w).
double mhe_objective(const MheProblem& pb, const DiscreteModel& model, const VectorField& h, const Vector& x0,
                     const std::vector<Vector>& w);

}  // namespace twoscale
