#include "twoscale/model.hpp"

#include "twoscale/numdiff.hpp"

#include <algorithm>

namespace twoscale {

void TwoTimeScaleSystem::validate() const {
    if (n_x <= 0 || n_u < 0 || n_y <= 0 || p_x <= 0) {
        throw ConfigError("TwoTimeScaleSystem: dimensions must be positive");
    }
    if (p_x >= n_x) throw ConfigError("TwoTimeScaleSystem: requires p_x < n_x");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("TwoTimeScaleSystem: epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    }
    if (!f || !g || !b || !k || !h) throw ConfigError("TwoTimeScaleSystem: missing vector field");
}

Matrix TwoTimeScaleSystem::constraint_jacobian(const Vector& x) const {
    if (dk) {
        Matrix jac = dk(x);
        if (jac.rows() != p_x || jac.cols() != n_x) throw DimensionError("dk: wrong shape");
        return jac;
    }
    return jacobian_central(k, x, p_x);
}

Vector eval_full_rhs(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u) {
    require_size(x, sys.n_x, "eval_full_rhs: state");
    require_size(u, sys.n_u, "eval_full_rhs: input");
    if (!(sys.epsilon > 0.0)) throw ConfigError("eval_full_rhs: epsilon must be positive");

    const Matrix gx = sys.g(x);
    const Matrix bx = sys.b(x);
    const Vector kx = sys.k(x);
    if (gx.rows() != sys.n_x || gx.cols() != sys.n_u) throw DimensionError("eval_full_rhs: g has wrong shape");
    if (bx.rows() != sys.n_x || bx.cols() != sys.p_x) throw DimensionError("eval_full_rhs: b has wrong shape");
    require_size(kx, sys.p_x, "eval_full_rhs: k(x)");

    Vector dx = sys.f(x);
    require_size(dx, sys.n_x, "eval_full_rhs: f(x)");
    dx += gx * u + (bx * kx) / sys.epsilon;
    if (!dx.allFinite()) throw NumericalError("eval_full_rhs: non-finite right-hand side");
    return dx;
}

bool check_rank_conditions(const TwoTimeScaleSystem& sys, const Vector& x, double tol) {
    if (!(tol > 0.0)) throw ConfigError("check_rank_conditions: tol must be positive");
    const Matrix bx = sys.b(x);
    const Matrix dk = sys.constraint_jacobian(x);
    if (!bx.allFinite() || !dk.allFinite()) throw NumericalError("check_rank_conditions: non-finite Jacobian");
    return numerical_rank(bx, tol) == sys.p_x && numerical_rank(dk, tol) == sys.p_x;
}

// ---------------------------------------------------------------------------

void NoiseSpec::validate(Eigen::Index n_x, Eigen::Index n_y) const {
    require_size(process_std, n_x, "NoiseSpec: process_std");
    require_size(measurement_std, n_y, "NoiseSpec: measurement_std");
    if ((process_std.array() < 0.0).any() || (measurement_std.array() < 0.0).any()) {
        throw ConfigError("NoiseSpec: standard deviations must be non-negative");
    }
}

bool NoiseSpec::is_zero() const {
    return (process_std.array() == 0.0).all() && (measurement_std.array() == 0.0).all();
}

namespace {
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}
}  // namespace

NoiseGenerator::NoiseGenerator(NoiseSpec spec)
    : spec_(std::move(spec)),
      process_engine_(seeded_engine(spec_.seed, 1)),
      measurement_engine_(seeded_engine(spec_.seed, 2)) {}

Vector NoiseGenerator::draw(std::mt19937_64& engine, const Vector& std_dev) {
    Vector out(std_dev.size());
    for (Eigen::Index i = 0; i < std_dev.size(); ++i) {
        // Always consume a draw so zero entries do not shift the stream.
        const double z = normal_(engine);
        out(i) = std_dev(i) * z;
    }
    return out;
}

Vector NoiseGenerator::process() { return draw(process_engine_, spec_.process_std); }

Vector NoiseGenerator::measurement() { return draw(measurement_engine_, spec_.measurement_std); }

// ---------------------------------------------------------------------------

InputSignal::InputSignal(std::vector<std::pair<double, Vector>> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) throw ConfigError("InputSignal: at least one breakpoint required");
    if (breakpoints_.front().first != 0.0) throw ConfigError("InputSignal: first breakpoint must be at t = 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i].first > breakpoints_[i - 1].first)) {
            throw ConfigError("InputSignal: breakpoint times must be strictly increasing");
        }
        if (breakpoints_[i].second.size() != breakpoints_.front().second.size()) {
            throw DimensionError("InputSignal: inconsistent input dimension");
        }
    }
}

InputSignal InputSignal::constant(Vector u) { return InputSignal({{0.0, std::move(u)}}); }

const Vector& InputSignal::at(double t) const {
    if (breakpoints_.empty()) throw ConfigError("InputSignal: empty schedule");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                               [](double value, const auto& bp) { return value < bp.first; });
    if (it == breakpoints_.begin()) return breakpoints_.front().second;
    return std::prev(it)->second;
}

SteadyStateResult refine_steady_state(const TwoTimeScaleSystem& sys, const Vector& x0, const Vector& u,
                                      double tol, int max_iterations) {
    require_size(x0, sys.n_x, "refine_steady_state: x0");
    const VectorField rhs = [&](const Vector& x) { return eval_full_rhs(sys, x, u); };
    SteadyStateResult out;
    out.x = x0;
    Vector r = rhs(out.x);
    out.residual = r.cwiseAbs().maxCoeff();
    while (out.residual > tol) {
        if (out.iterations >= max_iterations) {
            throw NonConvergenceError("refine_steady_state: residual " + std::to_string(out.residual) + " after " +
                                      std::to_string(out.iterations) + " Newton iterations");
        }
        const Matrix jac = jacobian_central(rhs, out.x, sys.n_x);
        const Vector dx = jac.fullPivLu().solve(-r);
        // Backtracking on the residual norm.
        double step = 1.0;
        Vector trial = out.x + dx;
        Vector r_trial = rhs(trial);
        while (r_trial.norm() > r.norm() && step > 1e-6) {
            step *= 0.5;
            trial = out.x + step * dx;
            r_trial = rhs(trial);
        }
        out.x = std::move(trial);
        r = std::move(r_trial);
        out.residual = r.cwiseAbs().maxCoeff();
        ++out.iterations;
    }
    return out;
}

}  // namespace twoscale
