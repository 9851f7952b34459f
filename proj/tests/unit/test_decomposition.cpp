#include "oracles.hpp"

#include "twoscale/cstr.hpp"
#include "twoscale/decomposition.hpp"
#include "twoscale/integrate.hpp"
#include "twoscale/orchestrator.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace twoscale;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const double x : v) out(i++) = x;
    return out;
}

const Vector kU = vec({2.0, 0.1});
const Vector kStart = vec({2.5, 0.0, 305.0, 330.0});

}  // namespace

TEST_CASE("fast state map") {
    FastStateMap m{{2, 3}};
    REQUIRE_NOTHROW(m.validate(4));
    REQUIRE_THROWS_AS((FastStateMap{{2, 2}}.validate(4)), ConfigError);
    REQUIRE_THROWS_AS(FastStateMap{{4}}.validate(4), ConfigError);
    Vector full = kStart;
    REQUIRE(m.extract(full) == vec({305.0, 330.0}));
    m.scatter(full, vec({1.0, 2.0}));
    REQUIRE(full == vec({2.5, 0.0, 1.0, 2.0}));
    const auto sys = cstr::build_cstr({});
    REQUIRE(fast_map_from_b(sys, kStart).indices == cstr::fast_map().indices);
}

TEST_CASE("fast field of the CSTR") {
    const auto sys = cstr::build_cstr({});
    const auto fast = derive_fast(sys, cstr::fast_map(), kStart);
    const Vector d = fast(vec({305.0, 330.0}));
    REQUIRE_THAT(d(0), WithinRel(oracle::kFastField[0], 1e-14));
    REQUIRE_THAT(d(1), WithinRel(oracle::kFastField[1], 1e-14));
    REQUIRE(fast(vec({310.0, 310.0})).norm() == 0.0);
    const Vector d2 = fast(vec({305.0, 355.0}));
    REQUIRE_THAT(d2(0), WithinRel(2.0 * d(0), 1e-14));
    REQUIRE_THAT(d2(1), WithinRel(2.0 * d(1), 1e-14));
}

TEST_CASE("fast map must cover every nonzero row of b") {
    const auto sys = cstr::build_cstr({});
    REQUIRE_THROWS_AS(derive_fast(sys, FastStateMap{{2}}, kStart), ConfigError);
}

TEST_CASE("algebraic variable against hand elimination") {
    const auto sys = cstr::build_cstr({});
    const Vector z = solve_z(sys, cstr::published_steady_state(), kU);
    REQUIRE_THAT(z(0), WithinRel(oracle::kZAtPublished, 1e-8));
    REQUIRE_THAT(z(0), WithinAbs(2.77, 0.01));
}

TEST_CASE("z vanishes for linear k with zero drift; scaling b rescales z") {
    TwoTimeScaleSystem s;
    s.n_x = 2;
    s.n_u = 1;
    s.n_y = 1;
    s.p_x = 1;
    s.epsilon = 0.1;
    s.f = [](const Vector&) { return Vector(Vector::Zero(2)); };
    s.g = [](const Vector&) { return Matrix(Matrix::Zero(2, 1)); };
    s.b = [](const Vector&) { return Matrix((Matrix(2, 1) << 1.0, -1.0).finished()); };
    s.k = [](const Vector& x) { return Vector::Constant(1, x(1) - x(0)); };
    s.h = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    REQUIRE_THAT(solve_z(s, vec({1.0, 1.0}), vec({3.0}))(0), WithinAbs(0.0, 1e-12));

    const auto sys = cstr::build_cstr({});
    auto scaled = sys;
    scaled.b = [&sys](const Vector& x) { return Matrix(3.0 * sys.b(x)); };
    const Vector xs = vec({1.7, 0.4, 303.0, 303.0});
    const double z1 = solve_z(sys, xs, kU)(0);
    const double z3 = solve_z(scaled, xs, kU)(0);
    REQUIRE_THAT(z3, WithinRel(z1 / 3.0, 1e-8));
    REQUIRE((derive_slow(sys).rhs(xs, kU) - derive_slow(scaled).rhs(xs, kU)).norm() < 1e-8);
}

TEST_CASE("singular L_b k is rejected") {
    auto sys = cstr::build_cstr({});
    sys.k = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    sys.dk = nullptr;
    REQUIRE_THROWS_AS(solve_z(sys, cstr::published_steady_state(), kU), NumericalError);
}

TEST_CASE("slow subsystem keeps the constraint") {
    const auto sys = cstr::build_cstr({});
    const auto slow = derive_slow(sys);
    const Vector xs = vec({1.7, 0.4, 303.0, 303.0});
    // d/dt k(x_s) = dk . rhs
    REQUIRE(std::abs((sys.constraint_jacobian(xs) * slow.rhs(xs, kU))(0)) < 1e-9);

    StepperConfig cfg;
    cfg.step = 0.1;
    const auto tr = integrate([&](double, const Vector& x) { return slow.rhs(x, kU); }, xs, 0.0, 5.0, cfg);
    for (const auto& x : tr.states) REQUIRE(std::abs(slow.constraint(x)(0)) <= 1e-6);
}

TEST_CASE("slow right-hand side nearly vanishes at the operating point") {
    const auto sys = cstr::build_cstr({});
    const auto refined = refine_steady_state(sys, cstr::published_steady_state(), kU);
    REQUIRE(derive_slow(sys).rhs(refined.x, kU).cwiseAbs().maxCoeff() < 1e-6);
    REQUIRE(derive_slow(sys).rhs(cstr::published_steady_state(), kU).cwiseAbs().maxCoeff() < 0.5);
}

TEST_CASE("fast steady state follows the conservation law") {
    const auto sys = cstr::build_cstr({});
    const auto fast = derive_fast(sys, cstr::fast_map(), kStart);
    const Vector fss = fast_steady_state(fast, vec({305.0, 330.0}));
    REQUIRE_THAT(fss(0), WithinRel(oracle::kFastSteadyState, 1e-10));
    REQUIRE_THAT(fss(1), WithinRel(oracle::kFastSteadyState, 1e-10));
    REQUIRE(fast_steady_state(fast, vec({312.0, 312.0})) == vec({312.0, 312.0}));

    cstr::CstrParams p;
    p.V_h = 0.2;
    const auto fast2 = derive_fast(cstr::build_cstr(p), cstr::fast_map(), kStart);
    REQUIRE_THAT(fast_steady_state(fast2, vec({305.0, 330.0}))(0), WithinRel(oracle::kFastSteadyStateVh02, 1e-10));
}

TEST_CASE("fast flow conserves V T + V_h T_j") {
    const auto sys = cstr::build_cstr({});
    const auto fast = derive_fast(sys, cstr::fast_map(), kStart);
    std::vector<double> grid;
    for (int j = 0; j <= 100; ++j) grid.push_back(0.001 * j);
    const auto tr = fast_trajectory(fast, vec({305.0, 330.0}), grid, 0.1);
    const double c0 = 305.0 + 0.0494 * 330.0;
    for (const auto& x : tr.states) REQUIRE_THAT(x(0) + 0.0494 * x(1), WithinRel(c0, 1e-12));
    REQUIRE(tr.states.front() == vec({305.0, 330.0}));
    REQUIRE_THAT(tr.states.back()(0), WithinRel(oracle::kFastSteadyState, 1e-6));
}

TEST_CASE("composite reconstruction identities") {
    const FastStateMap map{{2, 3}};
    const Vector fss = vec({306.0, 306.0});
    Trajectory slow, fast;
    for (int j = 0; j < 3; ++j) {
        slow.push_back(0.1 * j, vec({1.0 + j, 2.0, 306.0 + j, 306.0 + j}));
        fast.push_back(0.1 * j, fss);
    }
    const auto cp = composite(fast, slow, fss, map);
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(cp.states[j] == slow.states[j]);

    fast.states[0] = vec({305.0, 330.0});
    slow.states[0] = vec({2.5, 0.0, 306.0, 306.0});
    const auto cp2 = composite(fast, slow, fss, map);
    REQUIRE(cp2.states[0] == vec({2.5, 0.0, 305.0, 330.0}));

    fast.times[1] = 0.15;
    REQUIRE_THROWS_AS(composite(fast, slow, fss, map), ConfigError);
}

TEST_CASE("cubic spline resampling") {
    Trajectory cubic, constant;
    for (int j = 0; j <= 10; ++j) {
        const double t = 0.1 * j;
        cubic.push_back(t, vec({t * t * t - 2.0 * t + 1.0}));
        constant.push_back(t, vec({4.2}));
    }
    std::vector<double> grid;
    for (int j = 0; j <= 100; ++j) grid.push_back(0.01 * j);
    const auto rc = resample_cubic(cubic, grid);
    const auto rk = resample_cubic(constant, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double t = grid[j];
        REQUIRE_THAT(rc.states[j](0), WithinAbs(t * t * t - 2.0 * t + 1.0, 1e-12));
        REQUIRE_THAT(rk.states[j](0), WithinAbs(4.2, 1e-14));
    }
    REQUIRE(rc.states[50](0) == cubic.states[5](0));
    REQUIRE_THROWS_AS(resample_cubic(cubic, {-0.01, 0.5}), ConfigError);
    REQUIRE_THROWS_AS(resample_cubic(cubic, {0.5, 1.2}), ConfigError);

    const CubicSpline two({0.0, 1.0}, {1.0, 3.0});
    REQUIRE_THAT(two(0.25), WithinAbs(1.5, 1e-15));
    const CubicSpline three({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
    REQUIRE_THAT(three(1.5), WithinAbs(2.25, 1e-14));
}

TEST_CASE("resampled slow trajectory agrees with direct fine integration") {
    const auto sys = cstr::build_cstr({});
    const auto slow = derive_slow(sys);
    const OdeRhs rhs = [&](double, const Vector& x) { return slow.rhs(x, kU); };
    const Vector xs0 = vec({2.5, 0.0, 306.1768629693158, 306.1768629693158});
    StepperConfig coarse, fine;
    coarse.step = 0.1;
    fine.step = 0.01;
    const auto c = integrate(rhs, xs0, 0.0, 5.0, coarse);
    const auto f = integrate(rhs, xs0, 0.0, 5.0, fine);
    std::vector<double> grid;
    for (std::size_t j = 0; j < f.size(); ++j) grid.push_back(0.01 * static_cast<double>(j));
    const auto r = resample_cubic(c, grid);
    for (Eigen::Index i = 0; i < 4; ++i) {
        double scale = 0.0;
        for (const auto& x : f.states) scale = std::max(scale, std::abs(x(i)));
        for (std::size_t j = 1; j < grid.size(); ++j) {
            REQUIRE(std::abs(r.states[j](i) - f.states[j](i)) <= 5e-3 * scale);
        }
    }
}

TEST_CASE("decomposition check on the composite scenario") {
    const auto sc = cstr::decomposition_scenario();
    const auto sys = cstr::build_cstr(sc.params);
    const auto chk = run_decomposition_check(sys, cstr::fast_map(), sc.x0, InputSignal::constant(sc.u), sc.schedule);
    REQUIRE(chk.truth.size() == 501);
    REQUIRE(chk.slow_coarse.size() == 51);
    REQUIRE(chk.composite.size() == 501);
    REQUIRE_THAT(chk.x_fss(0), WithinRel(oracle::kFastSteadyState, 1e-10));
    REQUIRE((chk.composite.states[0] - sc.x0).norm() < 1e-12);
}
