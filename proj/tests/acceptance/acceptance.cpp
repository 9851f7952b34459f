// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--cli PATH]

#include "twoscale/config.hpp"
#include "twoscale/cstr.hpp"
#include "twoscale/ekf.hpp"
#include "twoscale/experiment.hpp"
#include "twoscale/integrate.hpp"
#include "twoscale/metrics.hpp"
#include "twoscale/mhe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace twoscale;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double decomposition_rmse(const std::vector<std::string>& overrides) {
    const auto cfg = load_config(std::nullopt, overrides, std::nullopt, "decomposition");
    return run_decomposition_report(cfg).rmse;
}

// 1. Decomposition fidelity.
Outcome criterion1() {
    const auto t0 = Clock::now();
    const double rmse = decomposition_rmse({});
    const double rmse_vh = decomposition_rmse({"params.V_h=0.2"});
    const double dt = seconds_since(t0);
    const bool a = rmse <= 0.5, b = rmse_vh <= 0.1, c = dt < 5.0;
    return {a && b && c, "composite RMSE " + fmt(rmse) + "% (<= 0.5: " + (a ? "ok" : "no") + "); V_h=0.2 RMSE " +
                             fmt(rmse_vh) + "% (<= 0.1: " + (b ? "ok" : "no") + "); runtime " + fmt(dt, 3) +
                             " s (< 5: " + (c ? "ok" : "no") + ")"};
}

// 2. epsilon refinement.
Outcome criterion2() {
    const auto t0 = Clock::now();
    std::vector<double> fine, coarse;
    for (const char* eps : {"0.1", "0.01", "0.001"}) {
        const std::string e = std::string("params.epsilon=") + eps;
        fine.push_back(decomposition_rmse({e, "schedule.delta_s=0.01", "schedule.n=1"}));
        coarse.push_back(decomposition_rmse({e}));
    }
    const double dt = seconds_since(t0);
    const bool refine = fine[1] * 2.0 <= fine[0] && fine[2] * 2.0 <= fine[1];
    const bool c = dt < 30.0;
    std::string detail = "RMSE at eps 0.1/0.01/0.001 with delta_s = delta_f: " + fmt(fine[0]) + " / " + fmt(fine[1]) +
                         " / " + fmt(fine[2]) + "% (each >= 2x smaller: " + (refine ? "ok" : "no") +
                         "); with delta_s = 0.1: " + fmt(coarse[0]) + " / " + fmt(coarse[1]) + " / " + fmt(coarse[2]) +
                         "%; runtime " + fmt(dt, 3) + " s (< 30: " + (c ? "ok" : "no") + ")";
    return {refine && c, detail};
}

// 3. Steady-state verification.
Outcome criterion3() {
    const auto sys = cstr::build_cstr({});
    const Vector xs = cstr::published_steady_state();
    const Vector u = cstr::nominal_scenario().u;
    const Vector r = eval_full_rhs(sys, xs, u);
    Eigen::Index worst = 0;
    const double resid = r.cwiseAbs().maxCoeff(&worst);
    const bool a = resid < 0.5;
    bool b = false;
    std::string newton;
    try {
        const auto refined = refine_steady_state(sys, xs, u, 1e-9);
        const double rel = (refined.x - xs).cwiseQuotient(xs).cwiseAbs().maxCoeff();
        b = refined.residual < 1e-9 && rel <= 0.01;
        newton = "Newton root [" + fmt(refined.x(0), 6) + ", " + fmt(refined.x(1), 6) + ", " + fmt(refined.x(2), 7) +
                 ", " + fmt(refined.x(3), 7) + "] residual " + fmt(refined.residual, 3) + ", max rel. deviation " +
                 fmt(100.0 * rel, 3) + "% (" + (b ? "ok" : "no") + ")";
    } catch (const std::exception& e) {
        newton = std::string("Newton failed: ") + e.what();
    }
    return {a && b, "published-point max-abs residual " + fmt(resid) + " in component " + sys.state_names[worst] +
                        " (< 0.5: " + (a ? "ok" : "no") + "); " + newton};
}

// 4. Stiffness limit.
Outcome criterion4() {
    const auto t0 = Clock::now();
    auto sc = cstr::nominal_scenario();
    auto setup = cstr::make_setup(sc);
    const OdeRhs rhs = [&](double t, const Vector& x) { return eval_full_rhs(setup.sys, x, setup.inputs.at(t)); };
    StepperConfig cfg;
    cfg.step = 0.05;
    bool diverged = false;
    std::string where;
    try {
        integrate(rhs, sc.x0, 0.0, sc.schedule.horizon, cfg);
    } catch (const DivergedError& e) {
        diverged = true;
        where = " at t = " + fmt(e.last_valid_time(), 3) + " s";
    }
    cfg.step = 0.01;
    bool completes = false;
    try {
        completes = integrate(rhs, sc.x0, 0.0, sc.schedule.horizon, cfg).states.back().allFinite();
    } catch (const DivergedError&) {
    }
    const double dt = seconds_since(t0);
    return {diverged && completes && dt < 5.0, std::string("step 0.05 s diverged") + (diverged ? where : ": no") +
                                                   "; step 0.01 s completes: " + (completes ? "yes" : "no") +
                                                   "; runtime " + fmt(dt, 3) + " s (< 5)"};
}

// 5. Estimator oracles.
Outcome criterion5() {
    const auto t0 = Clock::now();
    // (a) EKF covariance over 1000 predict/update steps on the CSTR fast subsystem.
    const auto sys = cstr::build_cstr({});
    const auto map = cstr::fast_map();
    Vector xs(4);
    xs << 1.205, 1.295, 302.4, 302.4;
    const auto fast = derive_fast(sys, map, xs);
    Vector fss(2);
    fss << 302.4, 302.4;
    Vector guess(2);
    guess << 308.0, 313.0;
    auto st = make_ekf_state(guess, 1e-8 * Matrix::Identity(2, 2), 1e-2 * Matrix::Identity(2, 2),
                             1e-6 * Matrix::Identity(2, 2));
    NoiseGenerator noise(NoiseSpec{Vector::Zero(4), Vector::Constant(2, 0.001), 5});
    double worst_asym = 0.0, worst_eig = std::numeric_limits<double>::infinity();
    for (int q = 0; q < 1000; ++q) {
        st = ekf_predict(std::move(st), fast.as_field(), 0.1);
        worst_asym = std::max(worst_asym, (st.P - st.P.transpose()).norm());
        worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix>(st.P).eigenvalues().minCoeff());
        st = ekf_update(std::move(st), sys.h(xs) + noise.measurement(), xs, fss, map, sys.h);
        worst_asym = std::max(worst_asym, (st.P - st.P.transpose()).norm());
        worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix>(st.P).eigenvalues().minCoeff());
    }
    const bool a = worst_asym <= 1e-10 && worst_eig >= -1e-10;

    // (b) Linear scalar MHE against dense normal equations.
    auto pb = make_mhe_problem(2, Vector::Constant(1, 0.5), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                               Matrix::Identity(1, 1), BoxBounds::unbounded(1), BoxBounds::unbounded(1),
                               BoxBounds::unbounded(1));
    const double y[] = {1.0, 1.7, 1.2};
    for (const double yj : y) mhe_advance(pb, Vector::Constant(1, yj), Vector::Zero(1));
    const DiscreteModel walk = [](const Vector& x, const Vector&) { return x; };
    NlsSolverConfig tight;
    tight.grad_tol = 1e-12;
    tight.cost_tol = 0.0;
    const auto sol = mhe_solve(pb, walk, [](const Vector& x) { return x; }, tight);
    Matrix A(6, 3);
    A << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 1;
    Vector b(6);
    b << 0.5, 0.0, 0.0, y[0], y[1], y[2];
    const Vector p = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    Vector got(3);
    got << sol.x[0](0), sol.w[0](0), sol.w[1](0);
    const double rel_b = (got - p).norm() / p.norm();
    const bool bb = rel_b <= 1e-8;

    // (c) Noise-free distributed run.
    const auto cfg = load_config(std::nullopt, {"noise.process_std=0", "noise.measurement_std=0"});
    const SchemeKind kinds[] = {SchemeKind::distributed};
    const auto rec = run_experiment(cfg, kinds);
    const Vector& xt = rec.truth.states.back();
    const Vector& xe = rec.schemes[0].estimate.states.back();
    const double final_err = 100.0 * (xe - xt).cwiseQuotient(xt).cwiseAbs().maxCoeff();
    const bool c = final_err < 0.1;
    const double dt = seconds_since(t0);
    return {a && bb && c && dt < 30.0,
            "(a) max |P-P^T| " + fmt(worst_asym, 3) + ", min eig " + fmt(worst_eig, 3) + " (" + (a ? "ok" : "no") +
                "); (b) MHE vs least squares rel. error " + fmt(rel_b, 3) + " (<= 1e-8: " + (bb ? "ok" : "no") +
                "); (c) noise-free final error " + fmt(final_err, 3) + "% max over states (< 0.1: " +
                (c ? "ok" : "no") + "); runtime " + fmt(dt, 3) + " s (< 30)"};
}

// 6. Scheme ordering over paired seeds.
Outcome criterion6() {
    const auto t0 = Clock::now();
    const auto cfg = load_config(std::nullopt);
    std::vector<double> rmse_d, rmse_dc, sig_d, sig_dc;
    int timing_ok = 0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        auto sc = cfg.scenario;
        sc.seed = static_cast<std::uint64_t>(s);
        const auto rec = run_schemes(cstr::make_setup(sc), kAllSchemes);
        const auto m = compute_metrics(rec, cfg.metrics);
        rmse_d.push_back(m[0].rmse);
        rmse_dc.push_back(m[1].rmse);
        sig_d.push_back(m[0].sigma[cstr::T]);
        sig_dc.push_back(m[1].sigma[cstr::T]);
        if (m[2].solve_seconds > m[0].solve_seconds) ++timing_ok;
    }
    const double dt = seconds_since(t0);
    const bool a = median(rmse_d) <= median(rmse_dc);
    const bool b = median(sig_d) < median(sig_dc);
    const bool c = timing_ok == seeds;
    return {a && b && c && dt < 300.0,
            "median RMSE distributed " + fmt(median(rmse_d)) + "% vs decentralized " + fmt(median(rmse_dc)) + "% (" +
                (a ? "ok" : "no") + "); median sigma_T " + fmt(median(sig_d)) + "% vs " + fmt(median(sig_dc)) + "% (" +
                (b ? "ok" : "no") + "); centralized slower on " + std::to_string(timing_ok) + "/" +
                std::to_string(seeds) + " seeds (" + (c ? "ok" : "no") + "); runtime " + fmt(dt, 3) + " s (< 300)"};
}

// 7. Horizon insensitivity.
Outcome criterion7() {
    const auto t0 = Clock::now();
    const auto cfg = load_config(std::nullopt);
    const SchemeKind kinds[] = {SchemeKind::distributed};
    const auto entries = run_sweep(cfg, {1, 2, 3, 5}, {cfg.scenario.seed}, kinds);
    std::vector<double> r;
    std::string list;
    for (const auto& e : entries) {
        r.push_back(e.metrics[0].rmse);
        list += (list.empty() ? "" : " / ") + fmt(e.metrics[0].rmse);
    }
    const double lo = *std::min_element(r.begin(), r.end());
    const double hi = *std::max_element(r.begin(), r.end());
    double mean = 0.0;
    for (const double v : r) mean += v / static_cast<double>(r.size());
    const double spread = 100.0 * (hi - lo) / mean;
    const double dt = seconds_since(t0);
    return {spread < 25.0 && dt < 120.0, "distributed RMSE at N = 1/2/3/5: " + list + "%; spread (max-min)/mean " +
                                             fmt(spread, 3) + "% (< 25); runtime " + fmt(dt, 3) + " s (< 120)"};
}

// 8. CLI determinism.
std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion8(const std::string& cli) {
    if (cli.empty()) return {false, "no CLI path given (--cli)"};
    const fs::path base = fs::temp_directory_path() / "twoscale_acceptance_determinism";
    fs::remove_all(base);
    struct Cmd {
        std::string args;
        std::string csv;
    };
    const std::vector<Cmd> cmds = {{"simulate --seed 7", "simulate.csv"},
                                   {"compare --seed 7", "compare.csv"},
                                   {"decompose-check", "decompose_check.csv"},
                                   {"sweep --seed 7 --horizons 1,3", "sweep.csv"}};
    std::string detail;
    bool all = true;
    for (const auto& c : cmds) {
        std::string first;
        bool same = true;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = base / (c.csv + std::to_string(rep));
            const std::string line = "\"" + cli + "\" " + c.args + " --out \"" + dir.string() + "\" > /dev/null";
            if (std::system(line.c_str()) != 0) {
                same = false;
                break;
            }
            const std::string text = read_file(dir / c.csv);
            if (rep == 0) {
                first = text;
                same = !text.empty();
            } else {
                same = same && text == first;
            }
        }
        all = all && same;
        detail += (detail.empty() ? "" : ", ") + c.csv + (same ? " identical" : " DIFFERS");
    }
    fs::remove_all(base);
    return {all, detail};
}

const std::map<int, std::string> kTitles = {
    {1, "decomposition fidelity"}, {2, "epsilon refinement"},   {3, "steady-state verification"},
    {4, "stiffness limit"},        {5, "estimator oracles"},    {6, "scheme ordering over paired seeds"},
    {7, "horizon insensitivity"},  {8, "CLI determinism"},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    std::string cli;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (a == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else {
            std::cerr << "usage: acceptance [--criterion N] [--cli PATH]\n";
            return 2;
        }
    }
    const std::map<int, std::function<Outcome()>> checks = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, [&] { return criterion8(cli); }},
    };
    int failures = 0;
    for (const auto& [n, check] : checks) {
        if (only && n != only) continue;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << kTitles.at(n) << "): " << o.detail
                  << std::endl;
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
