#pragma once

#include "twoscale/common.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace twoscale {

/// Implicit two-time-scale system
///
///   dx/dt = f(x) + g(x) u + (1/epsilon) b(x) k(x) + w
///       y = h(x) + v
///
/// with b(x) of full column rank and dk/dx of full row rank. The fast
/// dynamics are not aligned with particular state components; they live in
/// the directions spanned by b(x).
struct TwoTimeScaleSystem {
    Eigen::Index n_x = 0;
    Eigen::Index n_u = 0;
    Eigen::Index n_y = 0;
    Eigen::Index p_x = 0;

    VectorField f;  // n_x
    MatrixField g;  // n_x x n_u
    MatrixField b;  // n_x x p_x
    VectorField k;  // p_x
    VectorField h;  // n_y

    /// Optional analytic dk/dx (p_x x n_x); central differences otherwise.
    MatrixField dk;

    double epsilon = 0.0;

    std::vector<std::string> state_names;
    std::vector<std::string> state_units;
    std::vector<std::string> output_names;
    std::vector<std::string> output_units;

    /// Checks dimensions, 0 < epsilon < 1, p_x < n_x and that all fields are set.
    /// Throws ConfigError.
    void validate() const;

    /// dk/dx at `x`, analytic when available.
    Matrix constraint_jacobian(const Vector& x) const;
};

/// Deterministic part of the full right-hand side: f(x) + g(x)u + b(x)k(x)/epsilon.
/// Throws DimensionError on size mismatch and NumericalError on non-finite output.
Vector eval_full_rhs(const TwoTimeScaleSystem& sys, const Vector& x, const Vector& u);

/// True iff rank b(x) == p_x and rank dk/dx == p_x, where singular values count
/// when above `tol * sigma_max`.
bool check_rank_conditions(const TwoTimeScaleSystem& sys, const Vector& x, double tol = 1e-8);

struct SteadyStateResult {
    Vector x;
    double residual = 0.0;  // max-abs component of the full right-hand side at x
    int iterations = 0;
};

/// Newton iteration on eval_full_rhs(sys, x, u) = 0 from `x0` with a
/// central-difference Jacobian. Throws NonConvergenceError when the
/// max-abs residual is still above `tol` after `max_iterations`.
SteadyStateResult refine_steady_state(const TwoTimeScaleSystem& sys, const Vector& x0, const Vector& u,
                                      double tol = 1e-9, int max_iterations = 50);

// ---------------------------------------------------------------------------
// Stochastic terms
// ---------------------------------------------------------------------------

struct NoiseSpec {
    Vector process_std;      // n_x
    Vector measurement_std;  // n_y
    std::uint64_t seed = 0;

    void validate(Eigen::Index n_x, Eigen::Index n_y) const;
    bool is_zero() const;
};

/// Gaussian process and measurement noise. The two streams are seeded
/// independently from NoiseSpec::seed so that changing how often one is
/// drawn does not shift the other.
class NoiseGenerator {
public:
    explicit NoiseGenerator(NoiseSpec spec);

    Vector process();
    Vector measurement();

    const NoiseSpec& spec() const noexcept { return spec_; }

private:
    Vector draw(std::mt19937_64& engine, const Vector& std_dev);

    NoiseSpec spec_;
    std::mt19937_64 process_engine_;
    std::mt19937_64 measurement_engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

/// Piecewise-constant input schedule.
class InputSignal {
public:
    InputSignal() = default;
    /// Breakpoints must start at t = 0 and be strictly increasing.
    explicit InputSignal(std::vector<std::pair<double, Vector>> breakpoints);

    static InputSignal constant(Vector u);

    /// Value held on [t_i, t_{i+1}).
    const Vector& at(double t) const;

    const std::vector<std::pair<double, Vector>>& breakpoints() const noexcept { return breakpoints_; }

private:
    std::vector<std::pair<double, Vector>> breakpoints_;
};

}  // namespace twoscale
