#include "twoscale/decomposition.hpp"

#include "twoscale/integrate.hpp"
#include "twoscale/numdiff.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace twoscale {

// ---------------------------------------------------------------------------
// FastStateMap
// ---------------------------------------------------------------------------

void FastStateMap::validate(Eigen::Index n_x) const {
    std::set<Eigen::Index> seen;
    for (const auto i : indices) {
        if (i < 0 || i >= n_x) throw ConfigError("FastStateMap: index " + std::to_string(i) + " out of range");
        if (!seen.insert(i).second) throw ConfigError("FastStateMap: duplicate index " + std::to_string(i));
    }
    if (indices.empty()) throw ConfigError("FastStateMap: empty map");
}

Vector FastStateMap::extract(const Vector& full) const {
    Vector out(size());
    for (Eigen::Index j = 0; j < size(); ++j) out(j) = full(indices[static_cast<std::size_t>(j)]);
    return out;
}

void FastStateMap::scatter(Vector& full, const Vector& fast) const {
    require_size(fast, size(), "FastStateMap::scatter");
    for (Eigen::Index j = 0; j < size(); ++j) full(indices[static_cast<std::size_t>(j)]) = fast(j);
}

bool FastStateMap::contains(Eigen::Index i) const {
    return std::find(indices.begin(), indices.end(), i) != indices.end();
}

FastStateMap fast_map_from_b(const TwoTimeScaleSystem& sys, const Vector& x, double tol) {
    const Matrix bx = sys.b(x);
    const double scale = std::max(1.0, bx.cwiseAbs().maxCoeff());
    FastStateMap map;
    for (Eigen::Index i = 0; i < bx.rows(); ++i) {
        if (bx.row(i).cwiseAbs().maxCoeff() > tol * scale) map.indices.push_back(i);
    }
    return map;
}

// ---------------------------------------------------------------------------
// Fast subsystem
// ---------------------------------------------------------------------------

FastSubsystem::FastSubsystem(TwoTimeScaleSystem sys, FastStateMap map, Vector frozen)
    : sys_(std::move(sys)), map_(std::move(map)), frozen_(std::move(frozen)) {
    map_.validate(sys_.n_x);
    require_size(frozen_, sys_.n_x, "FastSubsystem: frozen state");
}

Vector FastSubsystem::embed(const Vector& xf) const {
    Vector full = frozen_;
    map_.scatter(full, xf);
    return full;
}

Vector FastSubsystem::operator()(const Vector& xf) const {
    const Vector full = embed(xf);
    const Vector field = sys_.b(full) * sys_.k(full);
    Vector out = map_.extract(field);
    if (!out.allFinite()) throw NumericalError("fast subsystem: non-finite field");
    return out;
}

Vector FastSubsystem::constraint(const Vector& xf) const { return sys_.k(embed(xf)); }

Matrix FastSubsystem::constraint_jacobian(const Vector& xf) const {
    const Matrix full = sys_.constraint_jacobian(embed(xf));
    Matrix out(full.rows(), map_.size());
    for (Eigen::Index j = 0; j < map_.size(); ++j) out.col(j) = full.col(map_.indices[static_cast<std::size_t>(j)]);
    return out;
}

Matrix FastSubsystem::fast_directions(const Vector& xf) const {
    const Matrix bx = sys_.b(embed(xf));
    Matrix out(map_.size(), bx.cols());
    for (Eigen::Index j = 0; j < map_.size(); ++j) out.row(j) = bx.row(map_.indices[static_cast<std::size_t>(j)]);
    return out;
}

VectorField FastSubsystem::as_field() const {
    return [self = *this](const Vector& xf) { return self(xf); };
}

FastSubsystem derive_fast(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& frozen) {
    sys.validate();
    map.validate(sys.n_x);
    require_size(frozen, sys.n_x, "derive_fast: frozen state");
    const FastStateMap nonzero = fast_map_from_b(sys, frozen);
    for (const auto i : nonzero.indices) {
        if (!map.contains(i)) {
            throw ConfigError("derive_fast: row " + std::to_string(i) +
                              " of b(x) is nonzero but the index is not in the fast map");
        }
    }
    return FastSubsystem(sys, map, frozen);
}

// ---------------------------------------------------------------------------
// Slow subsystem
// ---------------------------------------------------------------------------

Vector solve_z(const TwoTimeScaleSystem& sys, const Vector& xs, const Vector& u) {
    require_size(xs, sys.n_x, "solve_z: state");
    require_size(u, sys.n_u, "solve_z: input");
    const Matrix dk = sys.constraint_jacobian(xs);
    const Matrix lie_b = dk * sys.b(xs);
    const Vector lie_f = dk * sys.f(xs);
    const Matrix lie_g = dk * sys.g(xs);

    Eigen::JacobiSVD<Matrix> svd(lie_b);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)))) {
        throw NumericalError("solve_z: L_b k is singular; one differentiation of k(x_s) = 0 does not determine z");
    }
    Vector z = -lie_b.fullPivLu().solve(lie_f + lie_g * u);
    if (!z.allFinite()) throw NumericalError("solve_z: non-finite algebraic variable");
    return z;
}

SlowSubsystem::SlowSubsystem(TwoTimeScaleSystem sys) : sys_(std::move(sys)) {}

Vector SlowSubsystem::z(const Vector& xs, const Vector& u) const { return solve_z(sys_, xs, u); }

Vector SlowSubsystem::rhs(const Vector& xs, const Vector& u) const {
    const Vector zv = solve_z(sys_, xs, u);
    return sys_.f(xs) + sys_.g(xs) * u + sys_.b(xs) * zv;
}

Vector SlowSubsystem::constraint(const Vector& xs) const { return sys_.k(xs); }

SlowSubsystem derive_slow(const TwoTimeScaleSystem& sys) {
    sys.validate();
    return SlowSubsystem(sys);
}

// ---------------------------------------------------------------------------
// Fast steady state
// ---------------------------------------------------------------------------

namespace {

struct FlowScales {
    double spectral_radius = 0.0;
    double slowest_rate = 0.0;  // smallest nonzero |Re(lambda)|
};

FlowScales fast_flow_scales(const FastSubsystem& fast, const Vector& xf) {
    const Matrix jac = jacobian_central(fast.as_field(), xf, xf.size());
    Eigen::EigenSolver<Matrix> solver(jac, false);
    const Eigen::VectorXcd eig = solver.eigenvalues();
    FlowScales s;
    s.spectral_radius = eig.cwiseAbs().maxCoeff();
    const double largest_re = eig.real().cwiseAbs().maxCoeff();
    s.slowest_rate = largest_re;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        const double re = std::abs(eig(i).real());
        if (re > 1e-9 * largest_re) s.slowest_rate = std::min(s.slowest_rate, re);
    }
    return s;
}

Vector newton_polish(const FastSubsystem& fast, const Vector& xf0, Vector x, int iterations) {
    const Eigen::Index n = x.size();
    const Matrix bf = fast.fast_directions(xf0);
    const Eigen::Index p = bf.cols();
    if (n < p) throw NumericalError("fast_steady_state: fewer fast states than constraints");
    // Left null space of b_f: linear invariants of the fast flow.
    Matrix invariants(n, 0);
    if (n > p) {
        Eigen::JacobiSVD<Matrix> svd(bf, Eigen::ComputeFullU);
        invariants = svd.matrixU().rightCols(n - p);
    }
    for (int it = 0; it < iterations; ++it) {
        Vector residual(n);
        residual.head(p) = fast.constraint(x);
        residual.tail(n - p) = invariants.transpose() * (x - xf0);
        Matrix jac(n, n);
        jac.topRows(p) = fast.constraint_jacobian(x);
        jac.bottomRows(n - p) = invariants.transpose();
        const Vector dx = jac.fullPivLu().solve(-residual);
        if (!dx.allFinite()) throw NumericalError("fast_steady_state: singular Newton system");
        x += dx;
        if (dx.norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    return x;
}

}  // namespace

Vector fast_steady_state(const FastSubsystem& fast, const Vector& xf0, const FastSteadyStateOptions& opts) {
    require_size(xf0, fast.map().size(), "fast_steady_state: initial fast state");
    Vector x = xf0;
    Vector field = fast(x);
    if (field.norm() >= opts.tol) {
        const FlowScales scales = fast_flow_scales(fast, xf0);
        if (!(scales.spectral_radius > 0.0)) {
            throw NonConvergenceError("fast_steady_state: fast flow has no decaying mode");
        }
        const double tau_max = opts.horizon_factor / scales.slowest_rate;
        const double h = opts.step_fraction / scales.spectral_radius;
        const OdeRhs rhs = [&fast](double, const Vector& xi) { return fast(xi); };
        double tau = 0.0;
        while (field.norm() >= opts.tol) {
            if (tau > tau_max) {
                std::ostringstream msg;
                msg << "fast_steady_state: no convergence within tau_max = " << tau_max << " (|field| = "
                    << field.norm() << ")";
                throw NonConvergenceError(msg.str());
            }
            x = rk4_step(rhs, tau, x, h);
            tau += h;
            field = fast(x);
            if (!x.allFinite()) throw NonConvergenceError("fast_steady_state: fast flow diverged");
        }
    }
    return newton_polish(fast, xf0, x, opts.newton_iterations);
}

Vector SubsystemPair::slow_initial_state(const Vector& x0) const {
    Vector xs0 = x0;
    map().scatter(xs0, x_fss);
    return xs0;
}

SubsystemPair decompose(const TwoTimeScaleSystem& sys, const FastStateMap& map, const Vector& x0,
                        const FastSteadyStateOptions& opts) {
    FastSubsystem fast = derive_fast(sys, map, x0);
    Vector x_fss = fast_steady_state(fast, map.extract(x0), opts);
    return SubsystemPair{std::move(fast), derive_slow(sys), std::move(x_fss)};
}

Trajectory fast_trajectory(const FastSubsystem& fast, const Vector& xf0, const std::vector<double>& t_grid,
                           double epsilon, double max_tau_step) {
    if (!(epsilon > 0.0)) throw ConfigError("fast_trajectory: epsilon must be positive");
    if (max_tau_step <= 0.0) {
        const double rho = fast_flow_scales(fast, xf0).spectral_radius;
        max_tau_step = rho > 0.0 ? 0.1 / rho : 1.0;
    }
    const OdeRhs rhs = [&fast](double, const Vector& xi) { return fast(xi); };
    Trajectory out;
    Vector x = xf0;
    double tau = t_grid.empty() ? 0.0 : t_grid.front() / epsilon;
    for (const double t : t_grid) {
        const double target = t / epsilon;
        const double span = target - tau;
        if (span < 0.0) throw ConfigError("fast_trajectory: time grid must be increasing");
        const auto substeps = static_cast<long>(std::ceil(span / max_tau_step - 1e-12));
        if (substeps > 0) {
            const double h = span / static_cast<double>(substeps);
            for (long i = 0; i < substeps; ++i) x = rk4_step(rhs, tau + static_cast<double>(i) * h, x, h);
        }
        tau = target;
        out.push_back(t, x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Composite and resampling
// ---------------------------------------------------------------------------

Trajectory composite(const Trajectory& fast, const Trajectory& slow, const Vector& x_fss, const FastStateMap& map) {
    if (fast.size() != slow.size()) throw ConfigError("composite: fast and slow grids differ in length");
    require_size(x_fss, map.size(), "composite: x_fss");
    Trajectory out;
    for (std::size_t j = 0; j < slow.size(); ++j) {
        const double t = slow.times[j];
        if (std::abs(fast.times[j] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
            throw ConfigError("composite: fast and slow grids differ at sample " + std::to_string(j));
        }
        Vector x = slow.states[j];
        for (Eigen::Index m = 0; m < map.size(); ++m) {
            const auto i = map.indices[static_cast<std::size_t>(m)];
            x(i) = fast.states[j](m) + slow.states[j](i) - x_fss(m);
        }
        out.push_back(t, std::move(x));
    }
    return out;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ConfigError("CubicSpline: need at least two knots with matching values");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) throw ConfigError("CubicSpline: knots must be strictly increasing");
    }
    std::vector<double> dx(n - 1), secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        dx[i] = x_[i + 1] - x_[i];
        secant[i] = (y_[i + 1] - y_[i]) / dx[i];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
        slope_[0] = slope_[1] = secant[0];
        return;
    }
    if (n == 3) {
        const double c = (secant[1] - secant[0]) / (x_[2] - x_[0]);
        for (std::size_t i = 0; i < 3; ++i) slope_[i] = secant[0] + c * (2.0 * x_[i] - x_[0] - x_[1]);
        return;
    }

    // Tridiagonal system for the knot slopes with not-a-knot end rows.
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::SparseMatrix<double> a(ni, ni);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(3 * n);
    Vector rhs(ni);

    const double d0 = x_[2] - x_[0];
    entries.emplace_back(0, 0, dx[1]);
    entries.emplace_back(0, 1, d0);
    rhs(0) = ((dx[0] + 2.0 * d0) * dx[1] * secant[0] + dx[0] * dx[0] * secant[1]) / d0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        entries.emplace_back(r, r - 1, dx[i]);
        entries.emplace_back(r, r, 2.0 * (dx[i - 1] + dx[i]));
        entries.emplace_back(r, r + 1, dx[i - 1]);
        rhs(r) = 3.0 * (dx[i] * secant[i - 1] + dx[i - 1] * secant[i]);
    }
    const double dn = x_[n - 1] - x_[n - 3];
    entries.emplace_back(ni - 1, ni - 2, dn);
    entries.emplace_back(ni - 1, ni - 1, dx[n - 3]);
    rhs(ni - 1) = (dx[n - 2] * dx[n - 2] * secant[n - 3] + (2.0 * dn + dx[n - 2]) * dx[n - 3] * secant[n - 2]) / dn;

    a.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("CubicSpline: singular slope system");
    const Vector s = lu.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) slope_[i] = s(static_cast<Eigen::Index>(i));
}

double CubicSpline::operator()(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

Trajectory resample_cubic(const Trajectory& traj, const std::vector<double>& target_grid) {
    if (traj.size() < 2) throw ConfigError("resample_cubic: need at least two source samples");
    const double lo = traj.times.front();
    const double hi = traj.times.back();
    const double slack = 1e-12 * std::max(1.0, hi - lo);
    for (const double t : target_grid) {
        if (t < lo - slack || t > hi + slack) {
            std::ostringstream msg;
            msg << "resample_cubic: target time " << t << " outside source span [" << lo << ", " << hi
                << "] (extrapolation)";
            throw ConfigError(msg.str());
        }
    }
    const Eigen::Index dim = traj.dim();
    std::vector<CubicSpline> splines;
    splines.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) splines.emplace_back(traj.times, traj.component(i));

    Trajectory out;
    out.times.reserve(target_grid.size());
    out.states.reserve(target_grid.size());
    for (const double t : target_grid) {
        Vector x(dim);
        // Exact knot values where the target hits a source knot.
        auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
        if (it != traj.times.end() && *it == t) {
            x = traj.states[static_cast<std::size_t>(it - traj.times.begin())];
        } else {
            for (Eigen::Index i = 0; i < dim; ++i) x(i) = splines[static_cast<std::size_t>(i)](t);
        }
        out.push_back(t, std::move(x));
    }
    return out;
}

}  // namespace twoscale
