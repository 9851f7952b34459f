#pragma once

#include "twoscale/decomposition.hpp"
#include "twoscale/model.hpp"
#include "twoscale/orchestrator.hpp"

#include <string>

namespace twoscale::cstr {

/// Jacketed CSTR with an exothermic A -> B reaction.
struct CstrParams {
    double C_A0 = 2.5;     // mol/l
    double c_p = 8.0;      // J/(g K)
    double c_ph = 8.0;     // J/(g K)
    double rho = 800.0;    // g/l
    double rho_h = 800.0;  // g/l
    double k0 = 5e10;      // 1/s
    double E = 60000.0;    // J/mol
    double epsilon = 0.1;  // s/l
    double T_A = 305.0;    // K
    double T_h = 330.0;    // K
    double dH = 20000.0;   // J/mol
    double V = 1.0;        // l
    double V_h = 0.0494;   // l
    double R = 8.314;      // J/(mol K)
    /// Jacket inflow term F_h (T_h - T) when false, F_h (T_h - T_j) when true.
    bool jacket_uses_tj = false;

    void validate() const;
};

enum : Eigen::Index { C_A = 0, C_B = 1, T = 2, T_j = 3 };

/// Reaction rate k0 exp(-E / (R T)) C_A V.
double reaction_rate(const CstrParams& p, const Vector& x);

/// x = [C_A, C_B, T, T_j], u = [F_A, F_h], y = [C_B, T_j].
TwoTimeScaleSystem build_cstr(const CstrParams& params);

/// Temperatures (T, T_j) are the fast-mapped components.
FastStateMap fast_map();

/// V T + V_h T_j conserved by the fast flow, divided by V + V_h.
double fast_steady_temperature(const CstrParams& p, double T0, double Tj0);

/// Published stable operating point.
Vector published_steady_state();

struct Scenario {
    std::string name;
    CstrParams params;
    Vector x0;
    Vector u;
    EstimatorGuesses guesses;
    double process_std = 0.1;
    double measurement_std = 0.001;
    std::uint64_t seed = 1;
    SamplingSchedule schedule;
    int truth_substeps = 1;
    EkfTuning ekf;
    MheTuning slow_mhe;
    MheTuning central_mhe;
    double centralized_step = 0.01;

    void validate() const;
};

/// Estimation scenario: x0 = [2.5, 0, 306, 311], u = [2, 0.1], seeded noise.
Scenario nominal_scenario();

/// Decomposition scenario: x0 = [2.5, 0, 305, 330], noise-free.
Scenario decomposition_scenario();

/// Looks up "nominal" or "decomposition". Throws ConfigError otherwise.
Scenario scenario_by_name(const std::string& name);

/// State box [0, 5]^2 x [250, 400]^2.
BoxBounds default_state_bounds();

EstimationSetup make_setup(const Scenario& sc);

}  // namespace twoscale::cstr
