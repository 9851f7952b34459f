#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twoscale {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Vector-valued map of the state, e.g. f(x), k(x), h(x).
using VectorField = std::function<Vector(const Vector&)>;
// Matrix-valued map of the state, e.g. g(x), b(x).
using MatrixField = std::function<Matrix(const Vector&)>;
// Time-dependent right-hand side used by the integrators.
using OdeRhs = std::function<Vector(double, const Vector&)>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration, schedule, or scenario.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, singular matrices, failed rank conditions.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A state trajectory left the finite/bounded region.
class DivergedError : public NumericalError {
public:
    DivergedError(const std::string& what, double last_valid_time)
        : NumericalError(what), last_valid_time_(last_valid_time) {}

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// An iterative procedure hit its iteration or horizon limit.
class NonConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// Time-stamped sequence of equally sized state vectors.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    Eigen::Index dim() const noexcept { return states.empty() ? 0 : states.front().size(); }

    void push_back(double t, Vector x) {
        times.push_back(t);
        states.push_back(std::move(x));
    }

    /// Component `i` of every sample.
    std::vector<double> component(Eigen::Index i) const;
};

/// True when every entry is finite.
inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

void require_size(const Vector& v, Eigen::Index expected, const char* what);

}  // namespace twoscale
