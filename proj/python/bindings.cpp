#include "twoscale/config.hpp"
#include "twoscale/csv.hpp"
#include "twoscale/cstr.hpp"
#include "twoscale/experiment.hpp"
#include "twoscale/metrics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace twoscale;

namespace {

Matrix stack(const Trajectory& t) {
    Matrix m(static_cast<Eigen::Index>(t.size()), t.dim());
    for (std::size_t j = 0; j < t.size(); ++j) m.row(static_cast<Eigen::Index>(j)) = t.states[j].transpose();
    return m;
}

Trajectory unstack(const std::vector<double>& times, const Matrix& states) {
    if (static_cast<Eigen::Index>(times.size()) != states.rows()) {
        throw DimensionError("times and states must have the same number of rows");
    }
    Trajectory t;
    for (Eigen::Index j = 0; j < states.rows(); ++j) t.push_back(times[static_cast<std::size_t>(j)], states.row(j).transpose());
    return t;
}

std::vector<SchemeKind> kinds_from(const std::vector<std::string>& names) {
    std::vector<SchemeKind> kinds;
    for (const auto& n : names) kinds.push_back(parse_scheme(n));
    return kinds;
}

}  // namespace

PYBIND11_MODULE(_twoscale, m) {
    m.doc() = "Distributed state estimation for two-time-scale systems";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergedError>(m, "DivergedError", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<cstr::CstrParams>(m, "CstrParams")
        .def(py::init<>())
        .def_readwrite("C_A0", &cstr::CstrParams::C_A0)
        .def_readwrite("c_p", &cstr::CstrParams::c_p)
        .def_readwrite("c_ph", &cstr::CstrParams::c_ph)
        .def_readwrite("rho", &cstr::CstrParams::rho)
        .def_readwrite("rho_h", &cstr::CstrParams::rho_h)
        .def_readwrite("k0", &cstr::CstrParams::k0)
        .def_readwrite("E", &cstr::CstrParams::E)
        .def_readwrite("epsilon", &cstr::CstrParams::epsilon)
        .def_readwrite("T_A", &cstr::CstrParams::T_A)
        .def_readwrite("T_h", &cstr::CstrParams::T_h)
        .def_readwrite("dH", &cstr::CstrParams::dH)
        .def_readwrite("V", &cstr::CstrParams::V)
        .def_readwrite("V_h", &cstr::CstrParams::V_h)
        .def_readwrite("R", &cstr::CstrParams::R)
        .def_readwrite("jacket_uses_tj", &cstr::CstrParams::jacket_uses_tj);

    m.def(
        "cstr_rhs",
        [](const Vector& x, const Vector& u, const cstr::CstrParams& p) {
            return eval_full_rhs(cstr::build_cstr(p), x, u);
        },
        py::arg("x"), py::arg("u"), py::arg("params") = cstr::CstrParams{},
        "Full CSTR right-hand side f + g u + b k / epsilon.");
    m.def(
        "refine_steady_state",
        [](const Vector& x0, const Vector& u, const cstr::CstrParams& p, double tol) {
            const auto r = refine_steady_state(cstr::build_cstr(p), x0, u, tol);
            return py::make_tuple(r.x, r.residual, r.iterations);
        },
        py::arg("x0"), py::arg("u"), py::arg("params") = cstr::CstrParams{}, py::arg("tol") = 1e-9,
        "Newton root of the CSTR right-hand side; returns (x, max-abs residual, iterations).");
    m.def("fast_steady_temperature", &cstr::fast_steady_temperature, py::arg("params"), py::arg("T0"),
          py::arg("Tj0"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("scheme", [](const ExperimentConfig& c) { return std::string(to_string(c.scheme)); })
        .def_property_readonly("output", [](const ExperimentConfig& c) { return c.output; })
        .def_property_readonly("seed", [](const ExperimentConfig& c) { return c.scenario.seed; })
        .def_property_readonly("resolved", [](const ExperimentConfig& c) { return c.resolved.dump(2); });

    m.def(
        "load_config",
        [](std::optional<std::filesystem::path> path, const std::vector<std::string>& overrides,
           std::optional<std::uint64_t> seed, const std::string& scenario) {
            return load_config(path, overrides, seed, scenario);
        },
        py::arg("path") = py::none(), py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none(),
        py::arg("default_scenario") = "nominal");

    py::class_<SchemeResult>(m, "SchemeResult")
        .def_property_readonly("kind", [](const SchemeResult& s) { return std::string(to_string(s.kind)); })
        .def_property_readonly("estimate", [](const SchemeResult& s) { return stack(s.estimate); })
        .def_property_readonly("slow_estimate", [](const SchemeResult& s) { return stack(s.slow_estimate); })
        .def_property_readonly("fast_estimate", [](const SchemeResult& s) { return stack(s.fast_estimate); })
        .def_readonly("x_fss", &SchemeResult::x_fss)
        .def_readonly("mhe_instants", &SchemeResult::mhe_instants)
        .def_readonly("mhe_nonconverged", &SchemeResult::mhe_nonconverged)
        .def_readonly("solve_seconds", &SchemeResult::solve_seconds)
        .def_property_readonly("message_count", [](const SchemeResult& s) { return s.messages.size(); });

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("state_names", &RunRecord::state_names)
        .def_readonly("output_names", &RunRecord::output_names)
        .def_property_readonly("times", [](const RunRecord& r) { return r.truth.times; })
        .def_property_readonly("truth", [](const RunRecord& r) { return stack(r.truth); })
        .def_property_readonly("measurements", [](const RunRecord& r) { return stack(r.measurements); })
        .def_readonly("schemes", &RunRecord::schemes)
        .def("scheme", [](const RunRecord& r, const std::string& name) {
            const auto* s = r.find(parse_scheme(name));
            if (!s) throw py::key_error(name);
            return *s;
        });

    m.def(
        "run",
        [](const ExperimentConfig& cfg, const std::vector<std::string>& schemes) {
            const auto kinds = kinds_from(schemes);
            py::gil_scoped_release release;
            return run_experiment(cfg, kinds);
        },
        py::arg("config"), py::arg("schemes") = std::vector<std::string>{"distributed"},
        "Simulates the truth once and runs the named schemes on it.");

    m.def(
        "metrics",
        [](const RunRecord& rec, bool skip_first) {
            py::list out;
            for (const auto& s : compute_metrics(rec, IndexOptions{skip_first})) {
                py::dict d;
                d["scheme"] = std::string(to_string(s.kind));
                d["sigma"] = s.sigma;
                d["rmse"] = s.rmse;
                d["solve_seconds"] = s.solve_seconds;
                d["mhe_nonconverged"] = s.mhe_nonconverged;
                out.append(d);
            }
            return out;
        },
        py::arg("record"), py::arg("skip_first") = true);

    m.def(
        "decompose_check",
        [](const ExperimentConfig& cfg) {
            const auto rep = run_decomposition_report(cfg);
            py::dict d;
            d["times"] = rep.check.truth.times;
            d["truth"] = stack(rep.check.truth);
            d["composite"] = stack(rep.check.composite);
            d["x_fss"] = rep.check.x_fss;
            d["conservation_fss"] = rep.conservation_fss;
            d["sigma"] = rep.sigma;
            d["rmse"] = rep.rmse;
            return d;
        },
        py::arg("config"));

    m.def(
        "sigma_index",
        [](const std::vector<double>& t, const Matrix& est, const Matrix& truth, Eigen::Index i, bool skip_first) {
            return sigma_index(unstack(t, est), unstack(t, truth), i, IndexOptions{skip_first});
        },
        py::arg("times"), py::arg("estimate"), py::arg("truth"), py::arg("index"), py::arg("skip_first") = true);
    m.def(
        "rmse_index",
        [](const std::vector<double>& t, const Matrix& est, const Matrix& truth, bool skip_first) {
            return rmse_index(unstack(t, est), unstack(t, truth), IndexOptions{skip_first});
        },
        py::arg("times"), py::arg("estimate"), py::arg("truth"), py::arg("skip_first") = true);

    m.def("export_csv", &export_csv, py::arg("record"), py::arg("path"));
    m.def("import_csv", &import_csv, py::arg("path"));
}
