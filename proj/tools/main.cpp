// symreeb command-line runner.
//
//   symreeb index --system ellipsoid --r2sq 1.6180339887 --orbit P1
//   symreeb section --system hopf --theta 1.5707963 --grid 20
//   symreeb orbit-search --system hill --c -3 --start rho1 --end rho1
//   symreeb run --config out/manifest.json --out rerun
//
// Exit status: 0 success, 2 invalid input, 3 numerical failure.

#include "runner/run.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace symreeb;
using namespace symreeb::runner;

namespace {

struct Flags {
    std::string config, system, out, orbit, x0, start, end, fraction;
    std::optional<double> r1sq, r2sq, mu, c, theta, period, extent;
    std::optional<int> jobs, grid, iterates, seed_count;
    std::optional<std::uint64_t> rng_seed;
    bool random_seeds = false, no_svg = false;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON config or a previous manifest.json");
    app->add_option("--system", f.system, "hopf | ellipsoid | pcr3bp | hill | henon_heiles");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--rng-seed", f.rng_seed, "seed for randomized seed grids");
    app->add_option("--r1sq", f.r1sq, "ellipsoid r1^2");
    app->add_option("--r2sq", f.r2sq, "ellipsoid r2^2");
    app->add_option("--mu", f.mu, "mass ratio (pcr3bp)");
    app->add_option("--c", f.c, "energy level (pcr3bp, hill, henon_heiles)");
    app->add_option("--orbit", f.orbit, "P1 | P2 | C1 | C2 | all (hopf, ellipsoid)");
    app->add_option("--x0", f.x0, "initial point x1,y1,x2,y2 (with --period)");
    app->add_option("--period", f.period, "period of the orbit through --x0");
    app->add_option("--iterates", f.iterates, "report covers k = 1..n");
    app->add_option("--theta", f.theta, "page angle");
    app->add_option("--grid", f.grid, "grid size per axis");
    app->add_option("--start", f.start, "involution at the chord start");
    app->add_option("--end", f.end, "involution at the chord end");
    app->add_option("--fraction", f.fraction, "half | quarter");
    app->add_option("--seed-count", f.seed_count, "number of seeds on the fixed curve");
    app->add_option("--extent", f.extent, "half-width of the seed scan");
    app->add_flag("--random-seeds", f.random_seeds, "sample seeds with --rng-seed");
    app->add_flag("--no-svg", f.no_svg, "skip plot.svg");
}

RunConfig build_config(const Flags& f, const std::optional<Task>& task) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (task) c.task = *task;
    if (!f.system.empty() && f.system != c.system) {
        c.system = f.system;
        c.parameters.clear();
    }
    if (f.r1sq) c.parameters["r1sq"] = *f.r1sq;
    if (f.r2sq) c.parameters["r2sq"] = *f.r2sq;
    if (f.mu) c.parameters["mu"] = *f.mu;
    if (f.c) c.parameters["c"] = *f.c;
    if (!f.out.empty()) c.out_dir = f.out;
    if (f.jobs) c.jobs = *f.jobs;
    if (f.rng_seed) c.rng_seed = *f.rng_seed;
    if (!f.orbit.empty()) c.orbit = f.orbit;
    if (!f.x0.empty()) {
        std::vector<double> v;
        std::stringstream ss(f.x0);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                v.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ValidationError("--x0: cannot parse '" + item + "'");
            }
        }
        if (v.size() != 4) throw ValidationError("--x0 needs four comma-separated numbers");
        c.x0 = Vec4(v[0], v[1], v[2], v[3]);
    }
    if (f.period) c.period = *f.period;
    if (f.iterates) c.iterates = *f.iterates;
    if (f.theta) c.theta = *f.theta;
    if (f.grid) c.grid = *f.grid;
    if (!f.start.empty()) c.seeds.start = f.start;
    if (!f.end.empty()) c.seeds.end = f.end;
    if (!f.fraction.empty()) c.seeds.fraction = f.fraction;
    if (f.seed_count) c.seeds.count = *f.seed_count;
    if (f.extent) c.seeds.extent = *f.extent;
    if (f.random_seeds) c.seeds.random = true;
    if (f.no_svg) c.svg = false;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symreeb: symmetric periodic orbits, indices and surfaces of section"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::optional<Task>>> commands = {
        {"index", Task::index},
        {"orbit-search", Task::orbit_search},
        {"section", Task::section},
        {"linking", Task::linking},
        {"predicate", Task::predicate},
        {"critical-values", Task::critical_values},
        {"run", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<Task>>> subs;
    for (const auto& [name, task] : commands) {
        auto* sub = app.add_subcommand(name, task ? "run the " + name + " task" : "run the task named in --config");
        if (name == "orbit-search") sub->alias("orbit_search");
        if (name == "critical-values") sub->alias("critical_values");
        add_common(sub, flags);
        subs.emplace_back(sub, task);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        for (const auto& [sub, task] : subs)
            if (sub->parsed()) {
                if (!task && flags.config.empty()) throw ValidationError("run needs --config");
                cfg = build_config(flags, task);
            }
    } catch (const Error& e) {
        std::cerr << "error [stage=config kind=" << e.kind() << "]: " << e.what() << '\n';
        return 2;
    }

    const std::vector<std::string> command(argv, argv + argc);
    const RunOutcome r = run(cfg, command);
    if (r.exit_code != 0) {
        std::cerr << "error [stage=" << r.stage << "]: " << r.message << '\n';
        return r.exit_code;
    }
    for (const auto& f : r.outputs) std::cout << cfg.out_dir << '/' << f << '\n';
    std::cout << cfg.out_dir << "/manifest.json\n";
    return 0;
}
