#include "twoscale/nls.hpp"

#include "twoscale/numdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twoscale {

void NlsSolverConfig::validate() const {
    if (max_iters < 1) throw ConfigError("NlsSolverConfig: max_iters must be >= 1");
    if (!(grad_tol > 0.0) || !(step_tol > 0.0) || !(cost_tol >= 0.0)) throw ConfigError("NlsSolverConfig: tolerances must be positive");
    if (!(damping_init > 0.0)) throw ConfigError("NlsSolverConfig: damping_init must be positive");
}

namespace {
Vector project(const Vector& x, const Vector& lower, const Vector& upper) {
    return x.cwiseMax(lower).cwiseMin(upper);
}
}  // namespace

double projected_gradient_norm(const Vector& x, const Vector& gradient, const Vector& lower, const Vector& upper) {
    if (x.size() == 0) return 0.0;
    return (x - project(x - gradient, lower, upper)).cwiseAbs().maxCoeff();
}

NlsResult solve_bounded_least_squares(const ResidualFn& residual, Vector x0, const Vector& lower,
                                      const Vector& upper, const NlsSolverConfig& cfg) {
    cfg.validate();
    require_size(lower, x0.size(), "solve_bounded_least_squares: lower");
    require_size(upper, x0.size(), "solve_bounded_least_squares: upper");
    if ((lower.array() > upper.array()).any()) {
        throw ConfigError("solve_bounded_least_squares: infeasible bounds (lower > upper)");
    }

    NlsResult result;
    result.x = project(x0, lower, upper);
    Vector r = residual(result.x);
    if (!r.allFinite()) throw NumericalError("solve_bounded_least_squares: non-finite residual at initial point");
    result.cost = 0.5 * r.squaredNorm();
    result.accepted_costs.push_back(result.cost);

    double damping = cfg.damping_init;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        result.iterations = iter + 1;
        const Matrix jac = jacobian_central(residual, result.x, r.size());
        const Vector gradient = jac.transpose() * r;
        result.projected_gradient = projected_gradient_norm(result.x, gradient, lower, upper);
        if (result.projected_gradient <= cfg.grad_tol) {
            result.status = NlsStatus::gradient_converged;
            return result;
        }

        const Matrix normal = jac.transpose() * jac;
        Vector scale = normal.diagonal();
        const double scale_floor = 1e-12 * std::max(1.0, scale.maxCoeff());
        scale = scale.cwiseMax(scale_floor);

        bool accepted = false;
        bool tiny_step = false;
        bool small_decrease = false;
        while (damping < 1e16) {
            Matrix lhs = normal;
            lhs.diagonal() += damping * scale;
            const Vector step = lhs.ldlt().solve(-gradient);
            const Vector trial = project(result.x + step, lower, upper);
            const Vector actual_step = trial - result.x;
            if (actual_step.norm() <= cfg.step_tol * (1.0 + result.x.norm())) {
                tiny_step = true;
                break;
            }
            const Vector r_trial = residual(trial);
            const double cost_trial = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm()
                                                          : std::numeric_limits<double>::infinity();
            if (cost_trial <= result.cost) {
                if (result.cost - cost_trial <= cfg.cost_tol * result.cost) small_decrease = true;
                result.x = trial;
                r = r_trial;
                result.cost = cost_trial;
                result.accepted_costs.push_back(cost_trial);
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                break;
            }
            damping *= 4.0;
        }
        if (!accepted || tiny_step || small_decrease) {
            const Matrix jac_final = jacobian_central(residual, result.x, r.size());
            result.projected_gradient =
                projected_gradient_norm(result.x, jac_final.transpose() * r, lower, upper);
            if (result.projected_gradient <= cfg.grad_tol) {
                result.status = NlsStatus::gradient_converged;
            } else if (tiny_step) {
                result.status = NlsStatus::step_converged;
            } else if (small_decrease) {
                result.status = NlsStatus::cost_converged;
            } else {
                result.status = NlsStatus::stalled;
            }
            return result;
        }
    }
    const Matrix jac = jacobian_central(residual, result.x, r.size());
    result.projected_gradient = projected_gradient_norm(result.x, jac.transpose() * r, lower, upper);
    result.status = result.projected_gradient <= cfg.grad_tol ? NlsStatus::gradient_converged
                                                              : NlsStatus::max_iterations;
    return result;
}

}  // namespace twoscale
