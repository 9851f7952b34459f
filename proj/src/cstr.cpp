#include "twoscale/cstr.hpp"

#include <cmath>

namespace twoscale::cstr {

void CstrParams::validate() const {
    const double values[] = {C_A0, c_p, c_ph, rho, rho_h, k0, E, epsilon, T_A, T_h, dH, V, V_h, R};
    for (const double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("CstrParams: all parameters must be positive and finite");
    }
    if (!(epsilon < 1.0)) throw ConfigError("CstrParams: epsilon must be below 1");
}

double reaction_rate(const CstrParams& p, const Vector& x) {
    return p.k0 * std::exp(-p.E / (p.R * x(T))) * x(C_A) * p.V;
}

TwoTimeScaleSystem build_cstr(const CstrParams& params) {
    params.validate();
    const CstrParams p = params;
    const double heat = p.dH / (p.rho * p.c_p);
    const double ratio = (p.rho * p.c_p) / (p.rho_h * p.c_ph);

    TwoTimeScaleSystem sys;
    sys.n_x = 4;
    sys.n_u = 2;
    sys.n_y = 2;
    sys.p_x = 1;
    sys.epsilon = p.epsilon;
    sys.f = [p, heat](const Vector& x) {
        const double r = reaction_rate(p, x);
        Vector out(4);
        out << -r, r, -r * heat, 0.0;
        return out;
    };
    sys.g = [p](const Vector& x) {
        Matrix out = Matrix::Zero(4, 2);
        out(C_A, 0) = (p.C_A0 - x(C_A)) / p.V;
        out(C_B, 0) = -x(C_B) / p.V;
        out(T, 0) = (p.T_A - x(T)) / p.V;
        out(T_j, 1) = (p.T_h - (p.jacket_uses_tj ? x(T_j) : x(T))) / p.V_h;
        return out;
    };
    sys.b = [p, ratio](const Vector&) {
        Matrix out = Matrix::Zero(4, 1);
        out(T, 0) = 1.0 / p.V;
        out(T_j, 0) = -ratio / p.V_h;
        return out;
    };
    sys.k = [](const Vector& x) { return Vector::Constant(1, x(T_j) - x(T)); };
    sys.dk = [](const Vector&) {
        Matrix out(1, 4);
        out << 0.0, 0.0, -1.0, 1.0;
        return out;
    };
    sys.h = [](const Vector& x) {
        Vector y(2);
        y << x(C_B), x(T_j);
        return y;
    };
    sys.state_names = {"C_A", "C_B", "T", "T_j"};
    sys.state_units = {"mol/l", "mol/l", "K", "K"};
    sys.output_names = {"C_B", "T_j"};
    sys.output_units = {"mol/l", "K"};
    sys.validate();
    return sys;
}

FastStateMap fast_map() { return FastStateMap{{T, T_j}}; }

double fast_steady_temperature(const CstrParams& p, double T0, double Tj0) {
    const double ratio = (p.rho * p.c_p) / (p.rho_h * p.c_ph);
    // Invariant of dT = (Tj - T)/V, dTj = -ratio (Tj - T)/V_h.
    const double a = p.V * ratio, c = p.V_h;
    return (a * T0 + c * Tj0) / (a + c);
}

Vector published_steady_state() {
    Vector x(4);
    x << 1.205, 1.295, 302.3, 302.6;
    return x;
}

BoxBounds default_state_bounds() {
    Vector lo(4), hi(4);
    lo << 0.0, 0.0, 250.0, 250.0;
    hi << 5.0, 5.0, 400.0, 400.0;
    return BoxBounds{lo, hi};
}

void Scenario::validate() const {
    params.validate();
    require_size(x0, 4, "Scenario: x0");
    require_size(u, 2, "Scenario: u");
    if (!(process_std >= 0.0) || !(measurement_std >= 0.0)) {
        throw ConfigError("Scenario: noise standard deviations must be non-negative");
    }
    make_setup(*this).validate();
}

namespace {

MheTuning mhe_tuning(int horizon) {
    MheTuning t;
    t.horizon = horizon;
    t.Q = 1e-2 * Matrix::Identity(4, 4);
    t.R = 1e-6 * Matrix::Identity(2, 2);
    t.P = 1e-8 * Matrix::Identity(4, 4);
    t.state_bounds = default_state_bounds();
    t.disturbance_bounds = BoxBounds::symmetric(4, 1.0);
    t.noise_bounds = BoxBounds::symmetric(2, 0.1);
    return t;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const double x : v) out(i++) = x;
    return out;
}

}  // namespace

Scenario nominal_scenario() {
    Scenario sc;
    sc.name = "nominal";
    sc.x0 = vec({2.5, 0.0, 306.0, 311.0});
    sc.u = vec({2.0, 0.1});
    sc.guesses.centralized = vec({1.5, 1e-4, 308.0, 313.0});
    sc.guesses.fast = vec({308.0, 313.0});
    sc.guesses.slow = vec({1.5, 1e-4, 308.0, 313.0});
    sc.process_std = 0.1;
    sc.measurement_std = 0.001;
    sc.seed = 1;
    sc.schedule = SamplingSchedule{0.01, 0.1, 10, 5.0};
    sc.ekf.Q = 1e-2 * Matrix::Identity(2, 2);
    sc.ekf.R = 1e-6 * Matrix::Identity(2, 2);
    sc.ekf.P0 = 1e-8 * Matrix::Identity(2, 2);
    sc.slow_mhe = mhe_tuning(3);
    sc.central_mhe = mhe_tuning(3);
    sc.centralized_step = 0.01;
    return sc;
}

Scenario decomposition_scenario() {
    Scenario sc = nominal_scenario();
    sc.name = "decomposition";
    sc.x0 = vec({2.5, 0.0, 305.0, 330.0});
    sc.process_std = 0.0;
    sc.measurement_std = 0.0;
    sc.truth_substeps = 0;
    return sc;
}

Scenario scenario_by_name(const std::string& name) {
    if (name == "nominal") return nominal_scenario();
    if (name == "decomposition") return decomposition_scenario();
    throw ConfigError("unknown scenario '" + name + "' (expected nominal or decomposition)");
}

EstimationSetup make_setup(const Scenario& sc) {
    EstimationSetup s;
    s.sys = build_cstr(sc.params);
    s.fast_map = fast_map();
    s.x0 = sc.x0;
    s.inputs = InputSignal::constant(sc.u);
    s.schedule = sc.schedule;
    s.noise = NoiseSpec{Vector::Constant(4, sc.process_std), Vector::Constant(2, sc.measurement_std), sc.seed};
    s.truth_substeps = sc.truth_substeps;
    s.guesses = sc.guesses;
    s.ekf = sc.ekf;
    s.slow_mhe = sc.slow_mhe;
    s.central_mhe = sc.central_mhe;
    s.centralized_step = sc.centralized_step;
    return s;
}

}  // namespace twoscale::cstr
