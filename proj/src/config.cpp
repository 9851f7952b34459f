#include "twoscale/config.hpp"

#include <fstream>

namespace twoscale {

namespace {

Json to_array(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector from_array(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(what) + ": expected numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Json diagonal(const Matrix& m) { return to_array(m.diagonal()); }

Matrix from_diagonal(const Json& j, const char* what) {
    const Vector d = from_array(j, what);
    return d.asDiagonal();
}

Json solver_to_json(const NlsSolverConfig& c) {
    return Json{{"max_iters", c.max_iters}, {"grad_tol", c.grad_tol}, {"step_tol", c.step_tol},
                {"cost_tol", c.cost_tol}, {"damping_init", c.damping_init}};
}

NlsSolverConfig solver_from_json(const Json& j) {
    NlsSolverConfig c;
    c.max_iters = j.at("max_iters").get<int>();
    c.grad_tol = j.at("grad_tol").get<double>();
    c.step_tol = j.at("step_tol").get<double>();
    c.cost_tol = j.at("cost_tol").get<double>();
    c.damping_init = j.at("damping_init").get<double>();
    c.validate();
    return c;
}

Json mhe_to_json(const MheTuning& t) {
    return Json{{"horizon", t.horizon},
                {"Q", diagonal(t.Q)},
                {"R", diagonal(t.R)},
                {"P", diagonal(t.P)},
                {"state_lower", to_array(t.state_bounds.lower)},
                {"state_upper", to_array(t.state_bounds.upper)},
                {"disturbance_lower", to_array(t.disturbance_bounds.lower)},
                {"disturbance_upper", to_array(t.disturbance_bounds.upper)},
                {"noise_lower", to_array(t.noise_bounds.lower)},
                {"noise_upper", to_array(t.noise_bounds.upper)},
                {"solver", solver_to_json(t.solver)}};
}

MheTuning mhe_from_json(const Json& j) {
    MheTuning t;
    t.horizon = j.at("horizon").get<int>();
    t.Q = from_diagonal(j.at("Q"), "mhe.Q");
    t.R = from_diagonal(j.at("R"), "mhe.R");
    t.P = from_diagonal(j.at("P"), "mhe.P");
    t.state_bounds = {from_array(j.at("state_lower"), "state_lower"), from_array(j.at("state_upper"), "state_upper")};
    t.disturbance_bounds = {from_array(j.at("disturbance_lower"), "disturbance_lower"),
                            from_array(j.at("disturbance_upper"), "disturbance_upper")};
    t.noise_bounds = {from_array(j.at("noise_lower"), "noise_lower"), from_array(j.at("noise_upper"), "noise_upper")};
    t.solver = solver_from_json(j.at("solver"));
    return t;
}

const char* type_label(const Json& j) {
    if (j.is_number()) return "number";
    return j.type_name();
}

bool compatible(const Json& schema, const Json& value) {
    if (schema.is_number_float()) return value.is_number();
    if (schema.is_number_integer() || schema.is_number_unsigned()) {
        return value.is_number_integer() || value.is_number_unsigned();
    }
    return schema.type() == value.type();
}

}  // namespace

Json scenario_to_json(const cstr::Scenario& sc) {
    const auto& p = sc.params;
    Json j;
    j["scenario"] = sc.name;
    j["seed"] = sc.seed;
    j["params"] = Json{{"C_A0", p.C_A0}, {"c_p", p.c_p},   {"c_ph", p.c_ph}, {"rho", p.rho},
                       {"rho_h", p.rho_h}, {"k0", p.k0},   {"E", p.E},       {"epsilon", p.epsilon},
                       {"T_A", p.T_A},   {"T_h", p.T_h},   {"dH", p.dH},     {"V", p.V},
                       {"V_h", p.V_h},   {"R", p.R},       {"jacket_uses_tj", p.jacket_uses_tj}};
    j["x0"] = to_array(sc.x0);
    j["u"] = to_array(sc.u);
    j["guesses"] = Json{{"centralized", to_array(sc.guesses.centralized)},
                        {"fast", to_array(sc.guesses.fast)},
                        {"slow", to_array(sc.guesses.slow)}};
    j["noise"] = Json{{"process_std", sc.process_std}, {"measurement_std", sc.measurement_std}};
    j["schedule"] = Json{{"delta_f", sc.schedule.delta_f},
                         {"delta_s", sc.schedule.delta_s},
                         {"n", sc.schedule.n},
                         {"horizon", sc.schedule.horizon},
                         {"truth_substeps", sc.truth_substeps}};
    j["ekf"] = Json{{"Q", diagonal(sc.ekf.Q)},
                    {"R", diagonal(sc.ekf.R)},
                    {"P0", diagonal(sc.ekf.P0)},
                    {"update_base",
                     sc.ekf.update_base == EkfUpdateBase::predicted ? "predicted" : "previous_posterior"}};
    j["slow_mhe"] = mhe_to_json(sc.slow_mhe);
    j["central_mhe"] = mhe_to_json(sc.central_mhe);
    j["central_mhe"]["step"] = sc.centralized_step;
    return j;
}

cstr::Scenario scenario_from_json(const Json& j) {
    try {
        cstr::Scenario sc;
        sc.name = j.at("scenario").get<std::string>();
        sc.seed = j.at("seed").get<std::uint64_t>();
        const Json& p = j.at("params");
        auto& cp = sc.params;
        cp.C_A0 = p.at("C_A0").get<double>();
        cp.c_p = p.at("c_p").get<double>();
        cp.c_ph = p.at("c_ph").get<double>();
        cp.rho = p.at("rho").get<double>();
        cp.rho_h = p.at("rho_h").get<double>();
        cp.k0 = p.at("k0").get<double>();
        cp.E = p.at("E").get<double>();
        cp.epsilon = p.at("epsilon").get<double>();
        cp.T_A = p.at("T_A").get<double>();
        cp.T_h = p.at("T_h").get<double>();
        cp.dH = p.at("dH").get<double>();
        cp.V = p.at("V").get<double>();
        cp.V_h = p.at("V_h").get<double>();
        cp.R = p.at("R").get<double>();
        cp.jacket_uses_tj = p.at("jacket_uses_tj").get<bool>();
        sc.x0 = from_array(j.at("x0"), "x0");
        sc.u = from_array(j.at("u"), "u");
        sc.guesses.centralized = from_array(j.at("guesses").at("centralized"), "guesses.centralized");
        sc.guesses.fast = from_array(j.at("guesses").at("fast"), "guesses.fast");
        sc.guesses.slow = from_array(j.at("guesses").at("slow"), "guesses.slow");
        sc.process_std = j.at("noise").at("process_std").get<double>();
        sc.measurement_std = j.at("noise").at("measurement_std").get<double>();
        const Json& s = j.at("schedule");
        sc.schedule.delta_f = s.at("delta_f").get<double>();
        sc.schedule.delta_s = s.at("delta_s").get<double>();
        sc.schedule.n = s.at("n").get<int>();
        sc.schedule.horizon = s.at("horizon").get<double>();
        sc.truth_substeps = s.at("truth_substeps").get<int>();
        const Json& e = j.at("ekf");
        sc.ekf.Q = from_diagonal(e.at("Q"), "ekf.Q");
        sc.ekf.R = from_diagonal(e.at("R"), "ekf.R");
        sc.ekf.P0 = from_diagonal(e.at("P0"), "ekf.P0");
        const auto base = e.at("update_base").get<std::string>();
        if (base == "predicted") {
            sc.ekf.update_base = EkfUpdateBase::predicted;
        } else if (base == "previous_posterior") {
            sc.ekf.update_base = EkfUpdateBase::previous_posterior;
        } else {
            throw ConfigError("ekf.update_base must be 'predicted' or 'previous_posterior', got '" + base + "'");
        }
        sc.slow_mhe = mhe_from_json(j.at("slow_mhe"));
        sc.central_mhe = mhe_from_json(j.at("central_mhe"));
        sc.centralized_step = j.at("central_mhe").at("step").get<double>();
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

Json default_config(const std::string& scenario) {
    Json j;
    j["scheme"] = "distributed";
    j["output"] = "out";
    j["metrics"] = Json{{"skip_first", true}};
    const Json sc = scenario_to_json(cstr::scenario_by_name(scenario));
    for (const auto& [key, value] : sc.items()) j[key] = value;
    return j;
}

void merge_checked(Json& tree, const Json& patch, const Json& schema, const std::string& where) {
    if (!patch.is_object()) throw ConfigError("config: '" + (where.empty() ? "<root>" : where) + "' must be an object");
    for (const auto& [key, value] : patch.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!schema.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        const Json& expected = schema.at(key);
        if (expected.is_object()) {
            merge_checked(tree[key], value, expected, path);
            continue;
        }
        if (!compatible(expected, value)) {
            throw ConfigError("config: '" + path + "' expects " + type_label(expected) + ", got " + type_label(value));
        }
        if (expected.is_array()) {
            if (value.size() != expected.size()) {
                throw ConfigError("config: '" + path + "' expects " + std::to_string(expected.size()) + " entries, got " +
                                  std::to_string(value.size()));
            }
            for (const auto& v : value) {
                if (!v.is_number()) throw ConfigError("config: '" + path + "' expects numbers");
            }
        }
        tree[key] = value;
    }
}

void apply_override(Json& tree, const Json& schema, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    // Build the nested patch {"a": {"b": value}} from "a.b".
    Json patch = value;
    std::size_t end = key.size();
    while (true) {
        const auto dot = key.rfind('.', end - 1);
        const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                            end - (dot == std::string::npos ? 0 : dot + 1));
        if (part.empty()) throw ConfigError("config: malformed key '" + key + "'");
        patch = Json{{part, patch}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_checked(tree, patch, schema);
}

ExperimentConfig config_from_json(const Json& tree) {
    ExperimentConfig cfg;
    try {
        cfg.scheme = parse_scheme(tree.at("scheme").get<std::string>());
        cfg.output = tree.at("output").get<std::string>();
        cfg.metrics.skip_first = tree.at("metrics").at("skip_first").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.scenario = scenario_from_json(tree);
    cfg.scenario.validate();
    cfg.resolved = tree;
    return cfg;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                             std::optional<std::uint64_t> seed, const std::string& default_scenario) {
    Json from_file = Json::object();
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("config: cannot open '" + file->string() + "'");
        from_file = Json::parse(in, nullptr, false, true);
        if (from_file.is_discarded()) throw ConfigError("config: '" + file->string() + "' is not valid JSON");
        if (!from_file.is_object()) throw ConfigError("config: '" + file->string() + "' must hold a JSON object");
    }

    // The scenario name selects the defaults, so resolve it first.
    std::string scenario = default_scenario;
    if (from_file.contains("scenario")) {
        if (!from_file["scenario"].is_string()) throw ConfigError("config: 'scenario' expects string");
        scenario = from_file["scenario"].get<std::string>();
    }
    for (const auto& o : overrides) {
        if (o.rfind("scenario=", 0) == 0) scenario = o.substr(9);
    }

    const Json schema = default_config(scenario);
    Json tree = schema;
    merge_checked(tree, from_file, schema);
    for (const auto& o : overrides) apply_override(tree, schema, o);
    tree["scenario"] = scenario;
    if (seed) tree["seed"] = *seed;
    return config_from_json(tree);
}

}  // namespace twoscale
