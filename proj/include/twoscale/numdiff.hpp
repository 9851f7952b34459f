#pragma once

#include "twoscale/common.hpp"

namespace twoscale {

/// Central-difference Jacobian of `fn` at `x`, step 1e-6 * (1 + |x_j|) per column.
/// Throws NumericalError when an entry is not finite.
Matrix jacobian_central(const VectorField& fn, const Vector& x);

/// Same, for a function whose value at `x` is already known to have `rows` entries.
Matrix jacobian_central(const VectorField& fn, const Vector& x, Eigen::Index rows);

/// Numerical rank: number of singular values above `rel_tol * sigma_max`.
/// A zero matrix has rank 0.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol);

}  // namespace twoscale
