#include "twoscale/integrate.hpp"

#include "twoscale/numdiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twoscale {

void StepperConfig::validate() const {
    if (!(step > 0.0)) throw ConfigError("StepperConfig: step must be positive");
    if (!(max_state_norm > 0.0)) throw ConfigError("StepperConfig: max_state_norm must be positive");
    if (record_every < 1) throw ConfigError("StepperConfig: record_every must be >= 1");
}

Vector explicit_step(StepMethod method, const OdeRhs& rhs, double t, const Vector& x, double h,
                     const Vector* disturbance) {
    auto eval = [&](double ti, const Vector& xi) -> Vector {
        if (disturbance) return rhs(ti, xi) + *disturbance;
        return rhs(ti, xi);
    };
    if (method == StepMethod::euler) return x + h * eval(t, x);

    const Vector k1 = eval(t, x);
    const Vector k2 = eval(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = eval(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = eval(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const OdeRhs& rhs, const Vector& x0, double t0, double t1, const StepperConfig& cfg,
                     NoiseGenerator* noise) {
    cfg.validate();
    const double span = t1 - t0;
    if (span < 0.0) throw ConfigError("integrate: t1 < t0");
    const auto steps = static_cast<long>(std::llround(span / cfg.step));
    if (std::abs(static_cast<double>(steps) * cfg.step - span) > 1e-12 * std::max(1.0, std::abs(span))) {
        std::ostringstream msg;
        msg << "integrate: step " << cfg.step << " does not divide span " << span;
        throw ConfigError(msg.str());
    }
    if (!x0.allFinite()) throw DivergedError("integrate: non-finite initial state", t0);

    Trajectory out;
    out.times.reserve(static_cast<std::size_t>(steps / cfg.record_every + 2));
    out.states.reserve(out.times.capacity());
    out.push_back(t0, x0);

    Vector x = x0;
    double t = t0;
    for (long i = 0; i < steps; ++i) {
        Vector next;
        if (noise) {
            const Vector w = noise->process();
            next = explicit_step(cfg.method, rhs, t, x, cfg.step, &w);
        } else {
            next = explicit_step(cfg.method, rhs, t, x, cfg.step);
        }
        if (!next.allFinite() || next.norm() > cfg.max_state_norm) {
            std::ostringstream msg;
            msg << "integrate: state diverged after t = " << t << " with step " << cfg.step;
            throw DivergedError(msg.str(), t);
        }
        x = std::move(next);
        t = t0 + static_cast<double>(i + 1) * cfg.step;
        if ((i + 1) % cfg.record_every == 0) out.push_back(t, x);
    }
    if (steps % cfg.record_every != 0) out.push_back(t, x);
    return out;
}

namespace {
Eigen::VectorXcd full_rhs_eigenvalues(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u) {
    const Matrix jac = jacobian_central([&](const Vector& xi) { return eval_full_rhs(sys, xi, u); }, x, sys.n_x);
    Eigen::EigenSolver<Matrix> solver(jac, false);
    if (solver.info() != Eigen::Success) throw NumericalError("stiffness_probe: eigenvalue computation failed");
    return solver.eigenvalues();
}
}  // namespace

double stiffness_probe(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u) {
    const Eigen::VectorXcd eig = full_rhs_eigenvalues(sys, x, u);
    const Eigen::VectorXd re = eig.real().cwiseAbs();
    const double largest = re.maxCoeff();
    if (largest == 0.0) return 1.0;
    double smallest = largest;
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        if (re(i) > 1e-12 * largest) smallest = std::min(smallest, re(i));
    }
    return largest / smallest;
}

double spectral_radius(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u) {
    return full_rhs_eigenvalues(sys, x, u).cwiseAbs().maxCoeff();
}

}  // namespace twoscale
