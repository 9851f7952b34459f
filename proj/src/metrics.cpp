#include "twoscale/metrics.hpp"

#include <cmath>
#include <sstream>

namespace twoscale {

namespace {

std::size_t first_sample(const Trajectory& est, const Trajectory& truth, const IndexOptions& opts) {
    if (est.size() != truth.size()) throw DimensionError("index: estimate and truth have different lengths");
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (est.times[j] != truth.times[j]) throw DimensionError("index: estimate and truth grids differ");
        if (est.states[j].size() != truth.states[j].size()) throw DimensionError("index: state dimensions differ");
    }
    const std::size_t start = opts.skip_first ? 1 : 0;
    if (truth.size() <= start) throw DimensionError("index: no samples to average");
    return start;
}

double relative_error(const Trajectory& est, const Trajectory& truth, std::size_t j, Eigen::Index i,
                      const IndexOptions& opts) {
    const double x = truth.states[j](i);
    if (std::abs(x) < opts.zero_guard) {
        std::ostringstream msg;
        msg << "index: truth component " << i << " is zero at t = " << truth.times[j]
            << "; the relative error is undefined (exclude the sample or choose another state)";
        throw NumericalError(msg.str());
    }
    return (est.states[j](i) - x) / x;
}

}  // namespace

double sigma_index(const Trajectory& est, const Trajectory& truth, Eigen::Index i, const IndexOptions& opts) {
    const std::size_t start = first_sample(est, truth, opts);
    if (i < 0 || i >= truth.dim()) throw DimensionError("sigma_index: component out of range");
    double sum = 0.0;
    for (std::size_t j = start; j < truth.size(); ++j) {
        const double e = relative_error(est, truth, j, i, opts);
        sum += e * e;
    }
    return 100.0 * std::sqrt(sum / static_cast<double>(truth.size() - start));
}

double rmse_index(const Trajectory& est, const Trajectory& truth, const IndexOptions& opts) {
    const std::size_t start = first_sample(est, truth, opts);
    const Eigen::Index n = truth.dim();
    double sum = 0.0;
    for (std::size_t j = start; j < truth.size(); ++j) {
        double inner = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = relative_error(est, truth, j, i, opts);
            inner += e * e;
        }
        sum += std::sqrt(inner / static_cast<double>(n));
    }
    return 100.0 * sum / static_cast<double>(truth.size() - start);
}

}  // namespace twoscale
