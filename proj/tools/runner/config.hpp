#pragma once

#include <symreeb/orbits.hpp>
#include <symreeb/sections.hpp>

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace symreeb::runner {

using json = nlohmann::ordered_json;

enum class Task { index, orbit_search, section, linking, predicate, critical_values };
std::string to_string(Task t);
/// Accepts both "orbit-search" and "orbit_search" spellings.
Task task_from_string(const std::string& s);

struct SeedGrid {
    std::string start = "rho";
    std::string end = "rho";
    std::string fraction = "half";
    int count = 16;
    double extent = 2.0;
    /// draw `count` seeds from a 8x denser grid with the run's rng_seed
    bool random = false;
};

struct RunConfig {
    Task task = Task::index;
    std::string system = "ellipsoid";
    std::map<std::string, double> parameters;
    /// flat tolerance table, always complete after resolve()
    std::map<std::string, double> tolerances;
    SeedGrid seeds;
    /// "P1", "P2", "C1", "C2" on hopf/ellipsoid, or "all"
    std::string orbit;
    std::optional<Vec4> x0;
    double period = 0.0;
    int iterates = 1;
    double theta = 0.0;
    int grid = 20;
    std::string out_dir = "out";
    bool svg = true;
    std::uint64_t rng_seed = 0;
    int jobs = 1;
};

/// Every physical default in one place; echoed into each manifest.
const std::map<std::string, double>& default_tolerances();

/// Fills in defaults and checks ranges; throws ValidationError.
void resolve(RunConfig& cfg);

/// Parses a config object or a manifest (its "config" member). Unknown keys are rejected.
RunConfig config_from_json(const json& j);
json to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

/// Option structs built from the tolerance table.
IntegrateOptions integrate_options(const RunConfig& cfg);
ShootingOptions shooting_options(const RunConfig& cfg);
IndexOptions index_options(const RunConfig& cfg);
ReturnOptions return_options(const RunConfig& cfg);

}  // namespace symreeb::runner
