#include "runner/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace symreeb::runner {

std::string to_string(Task t) {
    switch (t) {
        case Task::index: return "index";
        case Task::orbit_search: return "orbit_search";
        case Task::section: return "section";
        case Task::linking: return "linking";
        case Task::predicate: return "predicate";
        case Task::critical_values: return "critical_values";
    }
    return "index";
}

Task task_from_string(const std::string& s) {
    std::string k = s;
    for (char& c : k)
        if (c == '-') c = '_';
    for (Task t : {Task::index, Task::orbit_search, Task::section, Task::linking, Task::predicate,
                   Task::critical_values})
        if (to_string(t) == k) return t;
    throw ValidationError("unknown task '" + s + "'");
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> table = {
        {"integration_rtol", 1e-11},
        {"integration_atol", 1e-13},
        {"energy_tol", 1e-9},
        {"shooting_max_iterations", 50},
        {"shooting_tolerance", 1e-11},
        {"shooting_endpoint_tolerance", 1e-9},
        {"shooting_horizon", 20},
        {"closure_tol", 1e-8},
        {"symmetry_tol", 1e-6},
        {"spectral_modes", 256},
        {"spectral_delta", 1e-9},
        {"spectral_cluster_tol", 1e-9},
        {"spectral_degeneracy_tol", 1e-8},
        {"spectral_gap_tol", 1e-8},
        {"section_time_tol", 1e-12},
        {"section_horizon_periods", 1000},
        {"section_transversality_samples", 1000},
        {"section_invariance_tol", 1e-6},
        {"linking_integrality_tol", 0.05},
        {"critical_value_tol", 1e-10},
    };
    return table;
}

namespace {

const std::set<std::string> kParameterKeys = {"r1sq", "r2sq", "mu", "c"};

template <class T>
T get(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "' in " + where);
}

}  // namespace

void resolve(RunConfig& cfg) {
    (void)system_from_string(cfg.system);
    for (const auto& [k, v] : cfg.parameters) {
        if (!kParameterKeys.count(k)) throw ValidationError("unknown system parameter '" + k + "'");
        if (!std::isfinite(v)) throw ValidationError("system parameter '" + k + "' is not finite");
    }
    std::map<std::string, double> merged = default_tolerances();
    for (const auto& [k, v] : cfg.tolerances) {
        if (!merged.count(k)) throw ValidationError("unknown tolerance '" + k + "'");
        if (!(v > 0) || !std::isfinite(v)) throw ValidationError("tolerance '" + k + "' must be positive");
        merged[k] = v;
    }
    cfg.tolerances = merged;
    if (cfg.seeds.count < 1) throw ValidationError("seeds.count must be >= 1");
    if (!(cfg.seeds.extent > 0)) throw ValidationError("seeds.extent must be positive");
    (void)chord_fraction_from_string(cfg.seeds.fraction);
    if (cfg.iterates < 1) throw ValidationError("iterates must be >= 1");
    if (cfg.grid < 1) throw ValidationError("grid must be >= 1");
    if (cfg.jobs < 1) throw ValidationError("jobs must be >= 1");
    if (!std::isfinite(cfg.theta)) throw ValidationError("theta must be finite");
    if (cfg.x0 && !(cfg.period > 0)) throw ValidationError("x0 needs a positive period");
    static const std::set<std::string> orbits = {"", "P1", "P2", "C1", "C2", "all"};
    if (!orbits.count(cfg.orbit)) throw ValidationError("orbit must be one of P1, P2, C1, C2, all");
}

RunConfig config_from_json(const json& in) {
    const json& j = in.contains("config") && in.contains("outputs") ? in.at("config") : in;
    reject_unknown(j,
                   {"task", "system", "tolerances", "seeds", "orbit", "x0", "period", "iterates", "theta",
                    "grid", "out_dir", "svg", "rng_seed", "jobs"},
                   "config");
    RunConfig c;
    if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
    if (j.contains("system")) {
        const json& s = j.at("system");
        if (s.is_string()) {
            c.system = s.get<std::string>();
        } else {
            reject_unknown(s, {"name", "parameters"}, "system");
            c.system = get<std::string>(s, "name", c.system);
            if (s.contains("parameters")) {
                reject_unknown(s.at("parameters"), kParameterKeys, "system.parameters");
                c.parameters = get<std::map<std::string, double>>(s, "parameters", {});
            }
        }
    }
    if (j.contains("tolerances")) c.tolerances = get<std::map<std::string, double>>(j, "tolerances", {});
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        reject_unknown(s, {"start", "end", "fraction", "count", "extent", "random"}, "seeds");
        c.seeds.start = get(s, "start", c.seeds.start);
        c.seeds.end = get(s, "end", c.seeds.end);
        c.seeds.fraction = get(s, "fraction", c.seeds.fraction);
        c.seeds.count = get(s, "count", c.seeds.count);
        c.seeds.extent = get(s, "extent", c.seeds.extent);
        c.seeds.random = get(s, "random", c.seeds.random);
    }
    c.orbit = get(j, "orbit", c.orbit);
    if (j.contains("x0")) {
        const auto v = get<std::vector<double>>(j, "x0", {});
        if (v.size() != 4) throw ValidationError("x0 needs four components");
        c.x0 = Vec4(v[0], v[1], v[2], v[3]);
    }
    c.period = get(j, "period", c.period);
    c.iterates = get(j, "iterates", c.iterates);
    c.theta = get(j, "theta", c.theta);
    c.grid = get(j, "grid", c.grid);
    c.out_dir = get(j, "out_dir", c.out_dir);
    c.svg = get(j, "svg", c.svg);
    c.rng_seed = get<std::uint64_t>(j, "rng_seed", c.rng_seed);
    c.jobs = get(j, "jobs", c.jobs);
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["task"] = to_string(c.task);
    j["system"] = {{"name", c.system}, {"parameters", c.parameters}};
    j["tolerances"] = c.tolerances;
    j["seeds"] = {{"start", c.seeds.start}, {"end", c.seeds.end},     {"fraction", c.seeds.fraction},
                  {"count", c.seeds.count}, {"extent", c.seeds.extent}, {"random", c.seeds.random}};
    j["orbit"] = c.orbit;
    if (c.x0) j["x0"] = {(*c.x0)(0), (*c.x0)(1), (*c.x0)(2), (*c.x0)(3)};
    j["period"] = c.period;
    j["iterates"] = c.iterates;
    j["theta"] = c.theta;
    j["grid"] = c.grid;
    j["out_dir"] = c.out_dir;
    j["svg"] = c.svg;
    j["rng_seed"] = c.rng_seed;
    j["jobs"] = c.jobs;
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

IntegrateOptions integrate_options(const RunConfig& c) {
    IntegrateOptions o;
    o.rtol = c.tolerances.at("integration_rtol");
    o.atol = c.tolerances.at("integration_atol");
    o.energy_tol = c.tolerances.at("energy_tol");
    return o;
}

ShootingOptions shooting_options(const RunConfig& c) {
    ShootingOptions o;
    o.max_iterations = static_cast<int>(c.tolerances.at("shooting_max_iterations"));
    o.tolerance = c.tolerances.at("shooting_tolerance");
    o.endpoint_tolerance = c.tolerances.at("shooting_endpoint_tolerance");
    o.horizon = c.tolerances.at("shooting_horizon");
    o.integration = integrate_options(c);
    return o;
}

IndexOptions index_options(const RunConfig& c) {
    IndexOptions o;
    o.spectral.modes = static_cast<int>(c.tolerances.at("spectral_modes"));
    o.spectral.delta = c.tolerances.at("spectral_delta");
    o.spectral.cluster_tol = c.tolerances.at("spectral_cluster_tol");
    o.spectral.degeneracy_tol = c.tolerances.at("spectral_degeneracy_tol");
    o.spectral.gap_tol = c.tolerances.at("spectral_gap_tol");
    return o;
}

ReturnOptions return_options(const RunConfig& c) {
    ReturnOptions o;
    o.time_tol = c.tolerances.at("section_time_tol");
    o.horizon_periods = c.tolerances.at("section_horizon_periods");
    o.integration = integrate_options(c);
    return o;
}

}  // namespace symreeb::runner
