#include "twoscale/mhe.hpp"

#include <cmath>
#include <limits>

namespace twoscale {

BoxBounds BoxBounds::unbounded(Eigen::Index n) {
    const double inf = std::numeric_limits<double>::infinity();
    return BoxBounds{Vector::Constant(n, -inf), Vector::Constant(n, inf)};
}

BoxBounds BoxBounds::symmetric(Eigen::Index n, double half_width) {
    return BoxBounds{Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
}

void BoxBounds::validate(Eigen::Index n, const char* what) const {
    if (lower.size() != n || upper.size() != n) {
        throw DimensionError(std::string(what) + ": bounds have wrong dimension");
    }
    if ((lower.array() > upper.array()).any() || lower.hasNaN() || upper.hasNaN()) {
        throw ConfigError(std::string(what) + ": empty bound set (lower > upper)");
    }
}

Vector BoxBounds::violation(const Vector& x) const {
    return (x - upper).cwiseMax(0.0) + (x - lower).cwiseMin(0.0);
}

namespace {

void require_positive_definite(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " must be square");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw ConfigError(std::string(what) + " must be positive definite");
}

// Whitening operator: ||e||^2_{C^-1} = ||L^-1 e||^2 with C = L L^T.
class Whitener {
public:
    explicit Whitener(const Matrix& covariance) : llt_(covariance) {}
    Vector operator()(const Vector& e) const { return llt_.matrixL().solve(e); }

private:
    Eigen::LLT<Matrix> llt_;
};

}  // namespace

void MheProblem::validate() const {
    if (horizon < 0) throw ConfigError("MheProblem: horizon must be >= 0");
    const Eigen::Index n = prior.size();
    if (P.rows() != n || Q.rows() != n) throw DimensionError("MheProblem: P and Q must match the state dimension");
    require_positive_definite(P, "MheProblem: P");
    require_positive_definite(Q, "MheProblem: Q");
    require_positive_definite(R, "MheProblem: R");
    state_bounds.validate(n, "MheProblem: state bounds");
    disturbance_bounds.validate(n, "MheProblem: disturbance bounds");
    noise_bounds.validate(R.rows(), "MheProblem: noise bounds");
    if (static_cast<int>(measurements.size()) > horizon + 1) throw ConfigError("MheProblem: window exceeds N+1");
}

MheProblem make_mhe_problem(int horizon, Vector prior, Matrix P, Matrix Q, Matrix R, BoxBounds state_bounds,
                            BoxBounds disturbance_bounds, BoxBounds noise_bounds) {
    MheProblem pb;
    pb.horizon = horizon;
    pb.prior = std::move(prior);
    pb.P = std::move(P);
    pb.Q = std::move(Q);
    pb.R = std::move(R);
    pb.state_bounds = std::move(state_bounds);
    pb.disturbance_bounds = std::move(disturbance_bounds);
    pb.noise_bounds = std::move(noise_bounds);
    pb.validate();
    return pb;
}

void mhe_advance(MheProblem& pb, const Vector& y_new, const Vector& u_prev) {
    require_size(y_new, pb.R.rows(), "mhe_advance: measurement");
    if (pb.measurements.empty()) {
        pb.measurements.push_back(y_new);
        return;
    }
    if (pb.full()) {
        if (pb.horizon == 0) throw ConfigError("mhe_advance: a horizon-0 window cannot shift; use N >= 1");
        const long new_start = pb.start_index + 1;
        auto it = pb.filtered.find(new_start);
        if (it == pb.filtered.end()) {
            throw Error("mhe_advance: no estimate x^(" + std::to_string(new_start) +
                        "|.) available for the new prior; solve before advancing a full window");
        }
        pb.prior = it->second;
        pb.measurements.pop_front();
        pb.inputs.pop_front();
        pb.start_index = new_start;
        pb.filtered.erase(pb.filtered.begin(), pb.filtered.lower_bound(new_start));
    }
    pb.measurements.push_back(y_new);
    pb.inputs.push_back(u_prev);
}

namespace {

struct Shooting {
    const MheProblem& pb;
    const DiscreteModel& model;

    std::vector<Vector> states(const Vector& x0, const std::vector<Vector>& w) const {
        std::vector<Vector> xs;
        xs.reserve(w.size() + 1);
        xs.push_back(x0);
        for (std::size_t j = 0; j < w.size(); ++j) xs.push_back(model(xs.back(), pb.inputs[j]) + w[j]);
        return xs;
    }
};

void unpack(const Vector& p, Eigen::Index n, std::size_t stages, Vector& x0, std::vector<Vector>& w) {
    x0 = p.head(n);
    w.resize(stages);
    for (std::size_t j = 0; j < stages; ++j) w[j] = p.segment(n * static_cast<Eigen::Index>(j + 1), n);
}

}  // namespace

double mhe_objective(const MheProblem& pb, const DiscreteModel& model, const VectorField& h, const Vector& x0,
                     const std::vector<Vector>& w) {
    const Whitener wp(pb.P), wq(pb.Q), wr(pb.R);
    const auto xs = Shooting{pb, model}.states(x0, w);
    double cost = wp(x0 - pb.prior).squaredNorm();
    for (const auto& wj : w) cost += wq(wj).squaredNorm();
    for (std::size_t j = 0; j < xs.size(); ++j) cost += wr(pb.measurements[j] - h(xs[j])).squaredNorm();
    return cost;
}

MheSolution mhe_solve(MheProblem& pb, const DiscreteModel& model, const VectorField& h, const NlsSolverConfig& cfg) {
    if (pb.measurements.empty()) throw ConfigError("mhe_solve: window holds no measurement");
    pb.validate();
    const Eigen::Index n = pb.state_dim();
    const Eigen::Index ny = pb.R.rows();
    const std::size_t stages = pb.inputs.size();
    const std::size_t samples = pb.measurements.size();
    if (stages + 1 != samples) throw ConfigError("mhe_solve: window needs one input per interval");

    const Whitener wp(pb.P), wq(pb.Q), wr(pb.R);
    const double penalty = std::sqrt(pb.penalty_weight);
    const Shooting shooting{pb, model};

    const Eigen::Index n_dec = n * static_cast<Eigen::Index>(stages + 1);
    const Eigen::Index n_res = n + n * static_cast<Eigen::Index>(stages) + ny * static_cast<Eigen::Index>(samples) +
                               n * static_cast<Eigen::Index>(stages) + ny * static_cast<Eigen::Index>(samples);

    const ResidualFn residual = [&](const Vector& p) {
        Vector x0;
        std::vector<Vector> w;
        unpack(p, n, stages, x0, w);
        const auto xs = shooting.states(x0, w);
        Vector r(n_res);
        Eigen::Index at = 0;
        r.segment(at, n) = wp(x0 - pb.prior);
        at += n;
        for (const auto& wj : w) {
            r.segment(at, n) = wq(wj);
            at += n;
        }
        for (std::size_t j = 0; j < samples; ++j) {
            r.segment(at, ny) = wr(pb.measurements[j] - h(xs[j]));
            at += ny;
        }
        for (std::size_t j = 1; j < samples; ++j) {
            r.segment(at, n) = penalty * pb.state_bounds.violation(xs[j]);
            at += n;
        }
        for (std::size_t j = 0; j < samples; ++j) {
            r.segment(at, ny) = penalty * pb.noise_bounds.violation(pb.measurements[j] - h(xs[j]));
            at += ny;
        }
        return r;
    };

    Vector lower(n_dec), upper(n_dec), p0(n_dec);
    lower.head(n) = pb.state_bounds.lower;
    upper.head(n) = pb.state_bounds.upper;
    p0.head(n) = pb.prior;
    for (std::size_t j = 0; j < stages; ++j) {
        const auto off = n * static_cast<Eigen::Index>(j + 1);
        lower.segment(off, n) = pb.disturbance_bounds.lower;
        upper.segment(off, n) = pb.disturbance_bounds.upper;
        p0.segment(off, n).setZero();
    }

    MheSolution sol;
    sol.solver = solve_bounded_least_squares(residual, p0, lower, upper, cfg);
    Vector x0;
    unpack(sol.solver.x, n, stages, x0, sol.w);
    sol.x = shooting.states(x0, sol.w);
    sol.v.reserve(samples);
    for (std::size_t j = 0; j < samples; ++j) sol.v.push_back(pb.measurements[j] - h(sol.x[j]));
    sol.cost = mhe_objective(pb, model, h, x0, sol.w);
    if (!sol.x.back().allFinite()) throw NumericalError("mhe_solve: non-finite estimate");

    pb.filtered[pb.end_index()] = sol.x.back();
    return sol;
}

}  // namespace twoscale
