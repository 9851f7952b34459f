#pragma once

#include "twoscale/common.hpp"

namespace twoscale {

struct IndexOptions {
    /// Leave out the first sample (C_B starts at exactly zero in the CSTR runs).
    bool skip_first = true;
    /// Truth magnitudes below this make the relative error undefined.
    double zero_guard = 1e-12;
};

/// Average relative standard deviation of component i, in percent:
/// 100 sqrt(mean_j ((est_i - x_i) / x_i)^2).
/// Throws DimensionError on a grid mismatch and NumericalError when a truth
/// sample is below the zero guard (the message names the index and time).
double sigma_index(const Trajectory& est, const Trajectory& truth, Eigen::Index i, const IndexOptions& opts = {});

/// Average root-mean-square relative error, in percent:
/// 100 mean_j sqrt(mean_i ((est_i - x_i) / x_i)^2).
double rmse_index(const Trajectory& est, const Trajectory& truth, const IndexOptions& opts = {});

}  // namespace twoscale
