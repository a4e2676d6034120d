#include "runner/run.hpp"

#include "runner/records.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#ifndef SYMREEB_VERSION
#define SYMREEB_VERSION "0.0.0"
#endif

namespace symreeb::runner {

namespace fs = std::filesystem;

const char* library_version() { return SYMREEB_VERSION; }

namespace {

struct NamedOrbit {
    std::string name;
    OrbitRecord orbit;
};

class Context {
public:
    Context(const RunConfig& c, RunOutcome& o) : cfg(c), out(o) {}

    const RunConfig& cfg;
    RunOutcome& out;
    SystemModel model;
    std::vector<std::string> notes;

    void stage(const std::string& s) { out.stage = s; }

    std::ofstream open(const std::string& name) {
        std::ofstream f(fs::path(cfg.out_dir) / name, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + name + "' in " + cfg.out_dir);
        out.outputs.push_back(name);
        return f;
    }
};

bool closed_form(const SystemModel& m) {
    return m.name == SystemName::hopf || m.name == SystemName::ellipsoid;
}

// P1 = z1-circle, P2 = z2-circle, started on Fix(rho)
OrbitRecord closed_form_orbit(const Context& ctx, int which) {
    const SystemModel& m = ctx.model;
    const double r1 = m.parameter("r1sq"), r2 = m.parameter("r2sq");
    const Involution rho = m.involution("rho");
    Vec4 x0;
    double T;
    if (which == 1) {
        x0 = Vec4(std::sqrt(r1), 0, 0, 0);
        T = kPi * r1;
    } else {
        x0 = Vec4(0, 0, std::sqrt(r2), 0);
        if (!rho.fixes(x0)) x0 = Vec4(0, 0, 0, std::sqrt(r2));
        T = kPi * r2;
    }
    return orbit_from_initial_condition(m, x0, T, integrate_options(ctx.cfg));
}

std::vector<Vec4> seeds(const Context& ctx) {
    const SeedGrid& g = ctx.cfg.seeds;
    if (!g.random) return fixed_curve_seeds(ctx.model, g.start, ctx.model.level, g.count, g.extent);
    auto pool = fixed_curve_seeds(ctx.model, g.start, ctx.model.level, 8 * g.count, g.extent);
    std::mt19937_64 rng(ctx.cfg.rng_seed);
    // Fisher-Yates with raw engine output so the order does not depend on the standard library
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng() % i]);
    if (pool.size() > static_cast<std::size_t>(g.count)) pool.resize(g.count);
    return pool;
}

std::vector<NamedOrbit> search(Context& ctx) {
    ctx.stage("seeds");
    const auto s = seeds(ctx);
    if (s.empty())
        throw NotFoundError("no seeds on Fix(" + ctx.cfg.seeds.start + ") at this energy and extent");
    ChordSpec spec;
    spec.start_involution = ctx.cfg.seeds.start;
    spec.end_involution = ctx.cfg.seeds.end;
    spec.energy = ctx.model.level;
    spec.fraction = chord_fraction_from_string(ctx.cfg.seeds.fraction);
    ctx.stage("orbit_search");
    const auto res = orbit_search(ctx.model, spec, s, shooting_options(ctx.cfg), ctx.cfg.jobs);
    ctx.notes.push_back(std::to_string(s.size()) + " seeds, " + std::to_string(res.orbits.size()) +
                        " orbits, " + std::to_string(res.failures.size()) + " failed seeds");
    if (res.orbits.empty()) {
        std::string msg = "no orbit converged from " + std::to_string(s.size()) + " seeds";
        if (!res.failures.empty()) msg += " (first failure: " + res.failures.front() + ")";
        throw NotFoundError(msg);
    }
    std::vector<NamedOrbit> out;
    for (std::size_t i = 0; i < res.orbits.size(); ++i) {
        OrbitRecord o = res.orbits[i];
        detect_symmetries(o, ctx.cfg.tolerances.at("symmetry_tol"));
        if (ctx.model.name == SystemName::pcr3bp || ctx.model.name == SystemName::hill) {
            try {
                o = classify_symmetry(o, ctx.model);
            } catch (const UnclassifiableError& e) {
                ctx.notes.push_back("orbit " + std::to_string(i) + ": " + e.what());
            }
        }
        out.push_back({"orbit" + std::to_string(i), std::move(o)});
    }
    return out;
}

std::vector<NamedOrbit> select_orbits(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    ctx.stage("orbit_setup");
    if (c.x0) return {{"x0", orbit_from_initial_condition(ctx.model, *c.x0, c.period, integrate_options(c))}};
    if (!c.orbit.empty() && !closed_form(ctx.model))
        throw ValidationError("named orbits P1/P2 exist only for hopf and ellipsoid");
    if (closed_form(ctx.model)) {
        std::vector<NamedOrbit> out;
        if (c.orbit == "P1" || c.orbit == "C1") out.push_back({c.orbit, closed_form_orbit(ctx, 1)});
        if (c.orbit == "P2" || c.orbit == "C2") out.push_back({c.orbit, closed_form_orbit(ctx, 2)});
        if (c.orbit.empty() || c.orbit == "all") {
            out.push_back({"P1", closed_form_orbit(ctx, 1)});
            out.push_back({"P2", closed_form_orbit(ctx, 2)});
        }
        return out;
    }
    return search(ctx);
}

const IndexReport* symmetric_report(const OrbitRecord& o, std::string& label) {
    for (const auto& [k, r] : o.indices)
        if (k.rfind("symmetric:", 0) == 0 && r.mu_rs) {
            label = k;
            return &r;
        }
    return nullptr;
}

std::string join_errors(const OrbitRecord& o) {
    std::string s;
    for (const auto& [k, e] : o.index_errors) s += (s.empty() ? "" : "; ") + k + ": " + e;
    return s;
}

void task_index(Context& ctx) {
    auto orbits = select_orbits(ctx);
    ctx.stage("indices");
    auto csv_file = ctx.open("results.csv");
    auto jsonl = ctx.open("results.jsonl");
    CsvWriter csv(csv_file);
    csv.row({"orbit", "k", "period", "mu_cz", "rotation_method_mu_cz", "rotation_number", "mu_rs",
             "crossing_method_mu_rs", "symmetric_frame", "closure_residual", "closure_tol",
             "spectral_delta", "degeneracy_tol", "errors"});
    const auto opt = index_options(ctx.cfg);
    for (auto& [name, base] : orbits) {
        for (int k = 1; k <= ctx.cfg.iterates; ++k) {
            OrbitRecord o = k == 1 ? base : cover(base, k);
            compute_indices(o, opt);
            std::optional<int> cz, cz_rot;
            std::optional<double> rot, rs, rs_cross;
            if (auto it = o.indices.find("global"); it != o.indices.end()) {
                cz = it->second.mu_cz;
                rot = it->second.rotation_number;
                if (auto r = it->second.residuals.find("rotation_method_mu_cz"); r != it->second.residuals.end())
                    cz_rot = static_cast<int>(std::lround(r->second));
            }
            std::string label;
            if (const IndexReport* r = symmetric_report(o, label)) {
                rs = r->mu_rs;
                if (auto c = r->residuals.find("crossing_method_mu_rs"); c != r->residuals.end())
                    rs_cross = c->second;
            }
            csv.row({name, std::to_string(k), num(o.period), num(cz), num(cz_rot), num(rot), num(rs),
                     num(rs_cross), label, num(o.closure_residual), num(ctx.cfg.tolerances.at("closure_tol")),
                     num(ctx.cfg.tolerances.at("spectral_delta")),
                     num(ctx.cfg.tolerances.at("spectral_degeneracy_tol")), join_errors(o)});
            json j = to_json(o);
            j["orbit"] = name;
            j["k"] = k;
            jsonl << j.dump() << '\n';
        }
    }
}

void task_orbit_search(Context& ctx) {
    auto orbits = search(ctx);
    ctx.stage("indices");
    const auto opt = index_options(ctx.cfg);
    for (auto& n : orbits) compute_indices(n.orbit, opt);
    ctx.stage("write");
    auto csv_file = ctx.open("results.csv");
    auto jsonl = ctx.open("results.jsonl");
    CsvWriter csv(csv_file);
    csv.row({"orbit", "period", "energy", "x0_1", "x0_2", "x0_3", "x0_4", "sym_type", "kang_type",
             "symmetries", "covering_number", "closure_residual", "energy_drift", "assembly_residual",
             "mu_cz", "mu_rs", "closure_tol", "symmetry_tol", "energy_tol", "index_errors"});
    std::vector<OrbitRecord> plotted;
    for (const auto& [name, o] : orbits) {
        std::string syms;
        for (const auto& m : o.symmetry) syms += (syms.empty() ? "" : ";") + m.label;
        std::optional<int> cz;
        if (auto it = o.indices.find("global"); it != o.indices.end()) cz = it->second.mu_cz;
        std::string label;
        const IndexReport* r = symmetric_report(o, label);
        const Vec4& x = o.trajectory.states.front();
        csv.row({name, num(o.period), num(o.energy), num(x(0)), num(x(1)), num(x(2)), num(x(3)),
                 to_string(o.sym_type), o.kang_type.value_or(""), syms, std::to_string(o.covering_number),
                 num(o.closure_residual), num(o.trajectory.energy_drift), num(o.assembly_residual), num(cz),
                 r ? num(r->mu_rs) : "", num(ctx.cfg.tolerances.at("closure_tol")),
                 num(ctx.cfg.tolerances.at("symmetry_tol")), num(ctx.cfg.tolerances.at("energy_tol")),
                 join_errors(o)});
        json j = to_json(o);
        j["orbit"] = name;
        jsonl << j.dump() << '\n';
        plotted.push_back(o);
    }
    if (ctx.cfg.svg) {
        auto svg = ctx.open("plot.svg");
        write_orbit_svg(svg, plotted);
    }
}

void task_section(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    ctx.stage("page");
    const SectionDisk disk =
        page(ctx.model, c.theta, static_cast<int>(c.tolerances.at("section_transversality_samples")));
    ctx.stage("return_map");
    const auto ropt = return_options(c);
    const auto pts = interior_grid(c.grid);
    const auto samples = return_grid(disk, pts, ropt, c.jobs);

    json summary;
    summary["theta"] = c.theta;
    summary["grid_points"] = samples.size();
    summary["invariant_flag"] = disk.invariant_flag;
    summary["min_transversality"] = disk.min_transversality;
    double tau_min = samples.empty() ? 0 : samples.front().tau, tau_max = tau_min, landing = 0, disp = 0;
    for (const auto& s : samples) {
        tau_min = std::min(tau_min, s.tau);
        tau_max = std::max(tau_max, s.tau);
        landing = std::max(landing, s.landing_residual);
        disp = std::max(disp, (s.image - s.point).norm());
    }
    summary["tau_min"] = tau_min;
    summary["tau_max"] = tau_max;
    summary["max_landing_residual"] = landing;
    summary["max_displacement"] = disp;
    summary["half_page_defect"] = half_page_defect(disk, samples);
    summary["invariance"] = json::array();
    for (const auto& inv : ctx.model.involutions) {
        const auto r = invariance_check(disk, inv);
        summary["invariance"].push_back({{"involution", inv.label},
                                         {"invariant", r.invariant},
                                         {"distance", r.distance},
                                         {"image_theta", r.image_theta},
                                         {"distance_to_image", r.distance_to_image},
                                         {"tol", c.tolerances.at("section_invariance_tol")}});
    }
    ctx.stage("fixed_point");
    summary["fixed_points"] = json::array();
    for (const auto& label : disk.invariant_flag) {
        const Involution inv = ctx.model.involution(label);
        json fp = {{"involution", label}};
        fp["reversibility_defect"] = reversibility_defect(disk, inv, pts, ropt);
        try {
            const auto f = symmetric_fixed_point(disk, inv, ropt);
            fp["point"] = {f.point(0), f.point(1)};
            fp["displacement"] = f.displacement;
            fp["involution_residual"] = f.involution_residual;
            fp["continuum"] = f.continuum;
            fp["tau"] = f.sample.tau;
        } catch (const NotFoundError& e) {
            fp["error"] = std::string(e.kind()) + ": " + e.what();
        }
        summary["fixed_points"].push_back(fp);
    }
    ctx.stage("area");
    double area = 0;
    for (const Vec2& w : {Vec2(0.1, 0.2), Vec2(-0.4, 0.3), Vec2(0.5, -0.5)})
        area = std::max(area, area_defect(disk, w, 1e-3, ropt));
    summary["area_defect"] = area;

    ctx.stage("write");
    auto csv = ctx.open("results.csv");
    write_return_csv(csv, samples, c.tolerances.at("section_time_tol"));
    auto jsonl = ctx.open("results.jsonl");
    jsonl << summary.dump() << '\n';
    if (c.svg) {
        auto svg = ctx.open("plot.svg");
        write_return_svg(svg, samples);
    }
}

void task_linking(Context& ctx) {
    auto orbits = select_orbits(ctx);
    ctx.stage("linking");
    auto csv_file = ctx.open("results.csv");
    auto jsonl = ctx.open("results.jsonl");
    CsvWriter csv(csv_file);
    csv.row({"kind", "a", "b", "value", "raw", "deviation", "min_distance_or_scale", "integrality_tol", "error"});
    const std::string tol = num(ctx.cfg.tolerances.at("linking_integrality_tol"));
    for (std::size_t i = 0; i < orbits.size(); ++i)
        for (std::size_t j = i + 1; j < orbits.size(); ++j) {
            json row = {{"kind", "linking"}, {"a", orbits[i].name}, {"b", orbits[j].name}};
            try {
                const auto l = linking_number(orbits[i].orbit, orbits[j].orbit);
                csv.row({"linking", orbits[i].name, orbits[j].name, std::to_string(l.value), num(l.raw),
                         num(std::abs(l.raw - l.value)), num(l.min_distance), tol, ""});
                row["result"] = to_json(l);
            } catch (const Error& e) {
                const std::string msg = std::string(e.kind()) + ": " + e.what();
                csv.row({"linking", orbits[i].name, orbits[j].name, "", "", "", "", tol, msg});
                row["error"] = msg;
            }
            jsonl << row.dump() << '\n';
        }
    for (const auto& [name, o] : orbits) {
        json row = {{"kind", "self_linking"}, {"a", name}};
        try {
            const auto frame = build_frame(o.trajectory, false);
            const auto sl = self_linking(o, frame, o.covering_number);
            const double dev = std::abs(sl.raw - std::round(sl.raw));
            csv.row({"self_linking", name, "", num(sl.value), num(sl.raw), num(dev), num(sl.scale), tol, ""});
            row["result"] = to_json(sl);
        } catch (const Error& e) {
            const std::string msg = std::string(e.kind()) + ": " + e.what();
            csv.row({"self_linking", name, "", "", "", "", "", tol, msg});
            row["error"] = msg;
        }
        jsonl << row.dump() << '\n';
    }
}

void task_predicate(Context& ctx) {
    auto orbits = select_orbits(ctx);
    ctx.stage("predicate");
    auto csv_file = ctx.open("results.csv");
    auto jsonl = ctx.open("results.jsonl");
    CsvWriter csv(csv_file);
    csv.row({"orbit", "simply_covered", "self_linking_minus_one", "cz_at_least_three",
             "rs_at_least_three_halves", "symmetric", "doubly_symmetric", "mu_cz", "mu_rs", "sl",
             "caveat"});
    const auto opt = index_options(ctx.cfg);
    for (auto& [name, o] : orbits) {
        compute_indices(o, opt);
        std::optional<SelfLinkingResult> sl;
        try {
            sl = self_linking(o, build_frame(o.trajectory, false), o.covering_number);
        } catch (const Error& e) {
            ctx.notes.push_back(name + ": self-linking unavailable (" + e.kind() + ": " + e.what() + ")");
        }
        const auto p = predicate_report(o, sl);
        csv.row({name, to_string(p.simply_covered), to_string(p.self_linking_minus_one),
                 to_string(p.cz_at_least_three), to_string(p.rs_at_least_three_halves),
                 to_string(p.symmetric), to_string(p.doubly_symmetric), num(p.mu_cz), num(p.mu_rs),
                 num(p.sl), p.caveat});
        json j = to_json(p);
        j["orbit"] = name;
        j["period"] = o.period;
        j["index_errors"] = o.index_errors;
        jsonl << j.dump() << '\n';
    }
}

void task_critical_values(Context& ctx) {
    ctx.stage("critical_points");
    const auto pts = critical_points(ctx.model);
    const auto values = critical_values(ctx.model);
    ctx.stage("write");
    auto csv_file = ctx.open("results.csv");
    CsvWriter csv(csv_file);
    csv.row({"value", "gradient_norm", "x1", "y1", "x2", "y2", "tol"});
    const std::string tol = num(ctx.cfg.tolerances.at("critical_value_tol"));
    for (const auto& p : pts)
        csv.row({num(p.value), num(p.gradient_norm), num(p.point(0)), num(p.point(1)), num(p.point(2)),
                 num(p.point(3)), tol});
    auto jsonl = ctx.open("results.jsonl");
    jsonl << json{{"critical_values", values}, {"count", values.size()}}.dump() << '\n';
}

}  // namespace

RunOutcome run(RunConfig cfg, const std::vector<std::string>& command) {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    Context ctx(cfg, out);
    bool have_dir = false;
    try {
        ctx.stage("config");
        resolve(cfg);
        ctx.stage("io");
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec) throw ValidationError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
        have_dir = true;
        ctx.stage("system");
        ctx.model = make_system(cfg.system, cfg.parameters);
        switch (cfg.task) {
            case Task::index: task_index(ctx); break;
            case Task::orbit_search: task_orbit_search(ctx); break;
            case Task::section: task_section(ctx); break;
            case Task::linking: task_linking(ctx); break;
            case Task::predicate: task_predicate(ctx); break;
            case Task::critical_values: task_critical_values(ctx); break;
        }
        out.stage.clear();
    } catch (const Error& e) {
        out.exit_code = e.exit_code();
        out.message = std::string(e.kind()) + ": " + e.what();
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.message = std::string("internal: ") + e.what();
    }

    json m;
    m["tool"] = "symreeb";
    m["version"] = library_version();
    m["command"] = command;
    m["config"] = to_json(cfg);
    m["defaults"] = default_tolerances();
    m["status"] = out.exit_code == 0 ? "ok" : "error";
    m["exit_code"] = out.exit_code;
    if (out.exit_code != 0) {
        m["failing_stage"] = out.stage;
        m["message"] = out.message;
    }
    m["notes"] = ctx.notes;
    m["outputs"] = json::array();
    for (const auto& f : out.outputs) {
        const fs::path p = fs::path(cfg.out_dir) / f;
        std::error_code ec;
        const auto bytes = fs::file_size(p, ec);
        m["outputs"].push_back({{"file", f}, {"sha256", ec ? "" : sha256_file(p.string())}, {"bytes", ec ? 0 : bytes}});
    }
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.manifest = m;
    if (have_dir) {
        std::ofstream f(fs::path(cfg.out_dir) / "manifest.json");
        if (f) f << m.dump(2) << '\n';
    }
    return out;
}

}  // namespace symreeb::runner
