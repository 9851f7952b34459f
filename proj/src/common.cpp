#include "twoscale/common.hpp"

namespace twoscale {

std::vector<double> Trajectory::component(Eigen::Index i) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& x : states) out.push_back(x(i));
    return out;
}

void require_size(const Vector& v, Eigen::Index expected, const char* what) {
    if (v.size() != expected) {
        throw DimensionError(std::string(what) + ": expected size " + std::to_string(expected) +
                             ", got " + std::to_string(v.size()));
    }
}

}  // namespace twoscale
