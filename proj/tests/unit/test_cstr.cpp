#include "oracles.hpp"

#include "twoscale/cstr.hpp"
#include "twoscale/decomposition.hpp"
#include "twoscale/integrate.hpp"

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

}  // namespace

TEST_CASE("parameter validation") {
    cstr::CstrParams p;
    REQUIRE_NOTHROW(p.validate());
    p.V_h = 0.0;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.epsilon = 1.0;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("reaction rate and right-hand side against frozen values") {
    const auto sys = cstr::build_cstr({});
    const Vector x = vec({2.5, 0.0, 305.0, 330.0});
    REQUIRE_THAT(cstr::reaction_rate({}, x), WithinRel(oracle::kRateAtStart, 1e-14));
    const Vector r = eval_full_rhs(sys, x, kU);
    for (int i = 0; i < 4; ++i) REQUIRE_THAT(r(i), WithinRel(oracle::kRhsAtStart[i], 1e-12));
}

TEST_CASE("published operating point") {
    const auto sys = cstr::build_cstr({});
    const Vector xs = cstr::published_steady_state();
    REQUIRE_THAT(cstr::reaction_rate({}, xs), WithinRel(oracle::kRateAtPublished, 1e-14));
    REQUIRE_THAT(cstr::reaction_rate({}, xs), WithinAbs(2.59, 0.01));
    const Vector r = eval_full_rhs(sys, xs, kU);
    for (int i = 0; i < 4; ++i) REQUIRE_THAT(r(i), WithinAbs(oracle::kRhsAtPublished[i], 1e-9));

    const auto refined = refine_steady_state(sys, xs, kU);
    REQUIRE(refined.residual < 1e-9);
    for (int i = 0; i < 4; ++i) REQUIRE_THAT(refined.x(i), WithinRel(xs(i), 0.01));
}

TEST_CASE("structure of the CSTR model") {
    const auto sys = cstr::build_cstr({});
    const Vector x = vec({1.0, 0.5, 310.0, 310.0});
    REQUIRE(sys.k(x)(0) == 0.0);
    const Matrix b = sys.b(x);
    REQUIRE(b(0, 0) == 0.0);
    REQUIRE(b(1, 0) == 0.0);
    REQUIRE_THAT(b(2, 0), WithinRel(1.0, 1e-15));
    REQUIRE_THAT(b(3, 0), WithinRel(-1.0 / 0.0494, 1e-15));
    REQUIRE(sys.h(x) == vec({0.5, 310.0}));
    REQUIRE(sys.output_names == std::vector<std::string>{"C_B", "T_j"});
}

TEST_CASE("jacket switch selects the inflow temperature difference") {
    cstr::CstrParams p;
    p.jacket_uses_tj = true;
    const auto sys = cstr::build_cstr(p);
    const Vector x = vec({1.0, 0.5, 300.0, 320.0});
    REQUIRE_THAT(sys.g(x)(3, 1), WithinRel((330.0 - 320.0) / 0.0494, 1e-14));
    REQUIRE_THAT(cstr::build_cstr({}).g(x)(3, 1), WithinRel((330.0 - 300.0) / 0.0494, 1e-14));
}

TEST_CASE("rank conditions hold on the operating box") {
    const auto sys = cstr::build_cstr({});
    for (double ca : {0.0, 2.5, 5.0}) {
        for (double t : {250.0, 325.0, 400.0}) {
            for (double tj : {250.0, 400.0}) REQUIRE(check_rank_conditions(sys, vec({ca, 5.0 - ca, t, tj})));
        }
    }
}

TEST_CASE("slow subsystem conserves total moles up to the feed") {
    const auto sys = cstr::build_cstr({});
    const auto slow = derive_slow(sys);
    const Vector xs = vec({1.7, 0.4, 303.0, 303.0});
    const Vector d = slow.rhs(xs, kU);
    REQUIRE_THAT(d(0) + d(1), WithinAbs(2.0 / 1.0 * (2.5 - 1.7 - 0.4), 1e-9));
}

TEST_CASE("scenarios") {
    const auto nom = cstr::nominal_scenario();
    REQUIRE(nom.x0 == vec({2.5, 0.0, 306.0, 311.0}));
    REQUIRE(nom.guesses.fast.size() == 2);
    REQUIRE(nom.guesses.slow == vec({1.5, 1e-4, 308.0, 313.0}));
    REQUIRE(nom.schedule.n == 10);
    REQUIRE(nom.slow_mhe.horizon == 3);
    REQUIRE(nom.ekf.R(0, 0) == 1e-6);
    REQUIRE_NOTHROW(nom.validate());

    const auto dec = cstr::decomposition_scenario();
    REQUIRE(dec.x0 == vec({2.5, 0.0, 305.0, 330.0}));
    REQUIRE(dec.process_std == 0.0);
    REQUIRE(dec.measurement_std == 0.0);
    REQUIRE_THROWS_AS(cstr::scenario_by_name("fig9"), ConfigError);
}

TEST_CASE("fast steady temperature from the conservation law") {
    REQUIRE_THAT(cstr::fast_steady_temperature({}, 305.0, 330.0), WithinRel(oracle::kFastSteadyState, 1e-14));
    cstr::CstrParams p;
    p.V_h = 0.2;
    REQUIRE_THAT(cstr::fast_steady_temperature(p, 305.0, 330.0), WithinRel(oracle::kFastSteadyStateVh02, 1e-14));
}
