#include "symreeb/orbits.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace symreeb {

std::string to_string(ChordFraction f) { return f == ChordFraction::half ? "half" : "quarter"; }

ChordFraction chord_fraction_from_string(const std::string& s) {
    if (s == "half") return ChordFraction::half;
    if (s == "quarter") return ChordFraction::quarter;
    throw ValidationError("chord fraction must be 'half' or 'quarter', got '" + s + "'");
}

std::string to_string(SymmetryType t) {
    switch (t) {
        case SymmetryType::symmetric: return "symmetric";
        case SymmetryType::doubly_symmetric: return "doubly_symmetric";
        case SymmetryType::type_I: return "type_I";
        case SymmetryType::type_II: return "type_II";
        case SymmetryType::nonsymmetric: return "nonsymmetric";
    }
    return "nonsymmetric";
}

SymmetryType symmetry_type_from_string(const std::string& s) {
    for (auto t : {SymmetryType::symmetric, SymmetryType::doubly_symmetric, SymmetryType::type_I,
                   SymmetryType::type_II, SymmetryType::nonsymmetric})
        if (to_string(t) == s) return t;
    throw ValidationError("unknown symmetry type '" + s + "'");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        case Verdict::not_computed: return "not computed";
    }
    return "not computed";
}

bool OrbitRecord::has_symmetry(const std::string& label) const {
    return std::any_of(symmetry.begin(), symmetry.end(),
                       [&](const SymmetryMatch& m) { return m.label == label; });
}

namespace {

using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

// Gram-Schmidt on the columns of a projector, in coordinate order
Mat42 ordered_range(const Mat4& P) {
    Mat42 B = Mat42::Zero();
    int k = 0;
    for (int i = 0; i < 4 && k < 2; ++i) {
        Vec4 c = P.col(i);
        for (int j = 0; j < k; ++j) c -= B.col(j).dot(c) * B.col(j);
        if (c.norm() > 1e-8) B.col(k++) = c.normalized();
    }
    if (k != 2) throw InternalError("fixed set of an anti-symplectic involution must be a plane");
    return B;
}

Mat42 fixed_plane(const Mat4& R) { return ordered_range(0.5 * (Mat4::Identity() + R)); }
Mat24 anti_rows(const Mat4& R) { return ordered_range(0.5 * (Mat4::Identity() - R)).transpose(); }

int symmetry_order(const Mat4& g) {
    Mat4 p = g;
    for (int m = 1; m <= 12; ++m) {
        if ((p - Mat4::Identity()).norm() < 1e-10) return m;
        p = g * p;
    }
    throw ValidationError("the two involutions generate a symmetry of order > 12");
}

Involution anti_involution(const SystemModel& model, const std::string& label) {
    Involution inv = model.involution(label);
    if (inv.kind != InvolutionKind::anti_symplectic)
        throw ValidationError("'" + label + "' is not anti-symplectic");
    return inv;
}

double first_approach(const SystemModel& model, const Vec4& x0, const Mat24& Q,
                      const ShootingOptions& opt) {
    IntegrateOptions io = opt.integration;
    io.samples = 4000;
    io.energy_tol = 1e-6;
    Trajectory tr;
    try {
        tr = integrate(model, x0, opt.horizon, io);
    } catch (const CollisionError&) {
        throw CollisionError("seed trajectory collides before reaching Fix(end)");
    }
    std::vector<double> d(tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) d[j] = (Q * tr.states[j]).norm();
    for (std::size_t j = 1; j + 1 < tr.size(); ++j)
        if (d[j] < d[j - 1] && d[j] <= d[j + 1]) return tr.times[j];
    throw NotFoundError("trajectory does not approach Fix(end) within the horizon");
}

// closest point of the periodic trace to p: (distance, time)
std::pair<double, double> distance_to_trace(const Trajectory& tr, const Vec4& p,
                                            const IntegrateOptions& io) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t j = 0; j < tr.size(); ++j) {
        const double d = (tr.states[j] - p).norm();
        if (d < bd) {
            bd = d;
            best = j;
        }
    }
    double vmax = 0.0;
    for (std::size_t j = 0; j < tr.size(); j += std::max<std::size_t>(1, tr.size() / 64))
        vmax = std::max(vmax, tr.velocity(j).norm());
    const double h = tr.duration() / std::max<std::size_t>(1, tr.size() - 1);
    if (bd > 4.0 * vmax * h + 1e-3) return {bd, tr.times[best]};
    const double T = tr.duration();
    double s = tr.times[best];
    Vec4 xs = tr.states[best];
    for (int it = 0; it < 12; ++it) {
        const Vec4 v = flow_field(tr.model, xs, tr.reeb_time);
        const double ds = -(xs - p).dot(v) / v.squaredNorm();
        s = std::fmod(s + ds, T);
        if (s < 0) s += T;
        xs = flow_endpoint(tr.model, tr.states[0], s, io);
        if (std::abs(ds) < 1e-14 * std::max(1.0, T)) break;
    }
    return {(xs - p).norm(), s};
}

Trajectory resample(const SystemModel& model, const Vec4& x0, double T, int n, IntegrateOptions io) {
    io.samples = n;
    return integrate(model, x0, T, io);
}

int covering_number(const Trajectory& tr, const IntegrateOptions& io) {
    const double T = tr.duration();
    const Vec4& x0 = tr.states[0];
    const std::size_t n = tr.size() - 1;
    for (int k = 12; k >= 2; --k) {
        if (n % k == 0 && (tr.states[n / k] - x0).norm() > 1e-3) continue;
        if ((flow_endpoint(tr.model, x0, T / k, io) - x0).norm() < 1e-8) return k;
    }
    return 1;
}

void finish_record(OrbitRecord& rec, const IntegrateOptions& io) {
    const auto& tr = rec.trajectory;
    rec.min_collision_distance = 1e300;
    if (!tr.model.singular_points.empty()) {
        for (const auto& s : tr.states)
            rec.min_collision_distance = std::min(rec.min_collision_distance, tr.model.distance_to_singular(s));
        rec.near_collision = rec.min_collision_distance < 0.05;
    }
    rec.covering_number = covering_number(tr, io);
    detect_symmetries(rec);
    rec.monodromy = integrate_variational(tr, io);
}

}  // namespace

void validate_chord_spec(const SystemModel& model, const ChordSpec& spec) {
    const Involution s = anti_involution(model, spec.start_involution);
    anti_involution(model, spec.end_involution);
    if (!spec.seed.allFinite()) throw ValidationError("chord seed is not finite");
    if (std::abs(model.H(spec.seed) - spec.energy) > 1e-10)
        throw ValidationError("chord seed is off the energy level by " +
                              std::to_string(model.H(spec.seed) - spec.energy));
    if ((s.matrix * spec.seed - spec.seed).norm() > 1e-12)
        throw ValidationError("chord seed is not fixed by '" + spec.start_involution + "'");
    if (spec.time_guess < 0) throw ValidationError("time guess must be positive");
}

std::vector<Vec4> fixed_curve_seeds(const SystemModel& model, const std::string& label, double c,
                                    int count, double extent) {
    if (count < 1 || !(extent > 0)) throw ValidationError("seed grid needs count >= 1 and extent > 0");
    const Mat42 F = fixed_plane(anti_involution(model, label).matrix);
    auto h = [&](double a1, double a2) {
        const Vec4 z = F * Vec2(a1, a2);
        if (model.distance_to_singular(z) < 1e-3) return std::nan("");
        return model.H(z) - c;
    };
    std::vector<Vec4> seeds;
    const int scan = 3200;
    const double span = 4.0 * extent;
    for (int i = 0; i < count; ++i) {
        const double a1 = -extent + 2.0 * extent * (i + 0.5) / count;
        double prev_a = -span, prev = h(a1, prev_a);
        for (int k = 1; k <= scan; ++k) {
            const double a = -span + 2.0 * span * k / scan;
            const double v = h(a1, a);
            if (std::isfinite(prev) && std::isfinite(v) && (prev < 0) != (v < 0)) {
                double lo = prev_a, hi = a, flo = prev;
                for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = h(a1, mid);
                    if ((fm < 0) == (flo < 0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                Vec4 z = F * Vec2(a1, 0.5 * (lo + hi));
                if (std::abs(model.H(z) - c) <= 1e-10) seeds.push_back(z);
            }
            prev_a = a;
            prev = v;
        }
    }
    return seeds;
}

OrbitRecord shoot_chord(const SystemModel& model, const ChordSpec& spec, const ShootingOptions& opt) {
    validate_chord_spec(model, spec);
    const Mat4 Rs = anti_involution(model, spec.start_involution).matrix;
    const Mat4 Re = anti_involution(model, spec.end_involution).matrix;
    const Mat42 F = fixed_plane(Rs);
    const Mat24 Q = anti_rows(Re);
    const IntegrateOptions& io = opt.integration;

    Vec2 a = F.transpose() * spec.seed;
    double t = spec.time_guess > 0 ? spec.time_guess : first_approach(model, spec.seed, Q, opt);

    auto evaluate = [&](const Vec2& av, double tv, Eigen::Vector3d& r, Eigen::Matrix3d* J) {
        const Vec4 x0 = F * av;
        const auto [xt, M] = flow_endpoint_jacobian(model, x0, tv, io);
        r(0) = model.H(x0) - spec.energy;
        r.tail<2>() = Q * xt;
        if (J) {
            J->setZero();
            J->block<1, 2>(0, 0) = model.gradient(x0).transpose() * F;
            J->block<2, 2>(1, 0) = Q * M * F;
            J->block<2, 1>(1, 2) = Q * flow_field(model, xt, io.reeb_time);
        }
    };

    Eigen::Vector3d r;
    Eigen::Matrix3d J;
    int iter = 0;
    bool converged = false;
    for (; iter < opt.max_iterations; ++iter) {
        evaluate(a, t, r, &J);
        if (r.norm() < opt.tolerance) {
            converged = true;
            break;
        }
        Eigen::Vector3d step = -J.colPivHouseholderQr().solve(r);
        if (!step.allFinite()) throw ConvergenceError("singular shooting Jacobian");
        double lambda = 1.0;
        bool accepted = false;
        while (lambda > 1e-6) {
            const Vec2 an = a + lambda * step.head<2>();
            const double tn = t + lambda * step(2);
            if (tn > 0) {
                Eigen::Vector3d rn;
                try {
                    evaluate(an, tn, rn, nullptr);
                    if (rn.norm() <= (1.0 - 1e-4 * lambda) * r.norm()) {
                        a = an;
                        t = tn;
                        accepted = true;
                        break;
                    }
                } catch (const CollisionError&) {
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            // integration noise floor: accept if already within the endpoint tolerance
            if (r.tail<2>().norm() < opt.endpoint_tolerance && std::abs(r(0)) < 1e-10) {
                converged = true;
                break;
            }
            throw ConvergenceError("Newton stagnated at residual " + std::to_string(r.norm()) +
                                   " after " + std::to_string(iter) + " iterations");
        }
    }
    if (!converged) {
        evaluate(a, t, r, nullptr);
        if (!(r.tail<2>().norm() < opt.endpoint_tolerance && std::abs(r(0)) < 1e-10))
            throw ConvergenceError("Newton did not converge in " + std::to_string(opt.max_iterations) +
                                   " iterations (residual " + std::to_string(r.norm()) + ")");
    }

    const Vec4 x0 = F * a;
    if ((flow_endpoint(model, x0, t, io) - x0).norm() < 1e-6)
        throw ConvergenceError("shooting converged to a full period instead of a chord");
    const Mat4 g = Re * Rs;
    const int ord = symmetry_order(g);
    const double T = 2.0 * ord * t;
    int nseg = opt.samples_per_chord;
    if (nseg <= 0) nseg = std::max(64, static_cast<int>(std::ceil(std::max(256.0, 128.0 * T) / (2 * ord))));
    nseg += nseg % 2;
    const int n = 2 * ord * nseg;

    IntegrateOptions cio = io;
    cio.samples = nseg;
    const Trajectory chord = integrate(model, x0, t, cio);

    OrbitRecord rec;
    rec.start_involution = spec.start_involution;
    rec.end_involution = spec.end_involution;
    rec.fraction = spec.fraction;
    rec.chord_time = t;
    rec.chord_copies = 2 * ord;
    rec.newton_iterations = iter;
    rec.energy = spec.energy;
    rec.period = T;
    rec.endpoint_residual = (Q * chord.states.back()).norm();
    if (rec.endpoint_residual > opt.endpoint_tolerance)
        throw RefineError("chord endpoint misses Fix(end) by " + std::to_string(rec.endpoint_residual));

    Trajectory& tr = rec.trajectory;
    tr.model = model;
    tr.reeb_time = io.reeb_time;
    tr.times.resize(n + 1);
    tr.states.reserve(n + 1);
    Mat4 G = Mat4::Identity();
    for (int m = 0; m < ord; ++m) {
        for (int j = 0; j < nseg; ++j) tr.states.push_back(G * chord.states[j]);
        for (int j = 0; j < nseg; ++j) tr.states.push_back(G * Re * chord.states[nseg - j]);
        G = g * G;
    }
    tr.states.push_back(x0);
    for (int i = 0; i <= n; ++i) tr.times[i] = T * i / n;
    tr.times[n] = T;
    for (const auto& s : tr.states) tr.energy_drift = std::max(tr.energy_drift, std::abs(model.H(s) - model.H(x0)));

    const Trajectory direct = resample(model, x0, T, n, io);
    for (int i = 0; i <= n; ++i)
        rec.assembly_residual = std::max(rec.assembly_residual, (direct.states[i] - tr.states[i]).norm());
    rec.closure_residual = (direct.states.back() - x0).norm();
    if (rec.assembly_residual > 1e-7)
        throw RefineError("reflected orbit and direct integration differ by " +
                          std::to_string(rec.assembly_residual));
    if (rec.closure_residual > 1e-8)
        throw RefineError("orbit fails to close (residual " + std::to_string(rec.closure_residual) + ")");
    finish_record(rec, io);
    return rec;
}

SearchResult orbit_search(const SystemModel& model, const ChordSpec& base,
                          const std::vector<Vec4>& seeds, const ShootingOptions& opt, int jobs) {
    const std::size_t N = seeds.size();
    std::vector<std::optional<OrbitRecord>> found(N);
    std::vector<std::string> errors(N);
    auto work = [&](std::size_t i) {
        ChordSpec spec = base;
        spec.seed = seeds[i];
        try {
            found[i] = shoot_chord(model, spec, opt);
        } catch (const Error& e) {
            errors[i] = "seed " + std::to_string(i) + ": " + e.kind() + ": " + e.what();
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < N; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < N; i += jobs) work(i);
            });
        for (auto& th : pool) th.join();
    }

    SearchResult out;
    for (std::size_t i = 0; i < N; ++i) {
        if (!found[i]) {
            out.failures.push_back(errors[i]);
            continue;
        }
        const OrbitRecord& cand = *found[i];
        bool duplicate = false;
        for (const auto& kept : out.orbits) {
            if (std::abs(kept.period - cand.period) > 1e-6 * std::max(1.0, kept.period)) continue;
            if (distance_to_trace(kept.trajectory, cand.trajectory.states[0], opt.integration).first < 1e-6) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.orbits.push_back(cand);
    }
    return out;
}

OrbitRecord orbit_from_initial_condition(const SystemModel& model, const Vec4& z0, double T,
                                         const IntegrateOptions& opt) {
    if (!(T > 0)) throw ValidationError("period must be positive");
    OrbitRecord rec;
    rec.trajectory = integrate(model, z0, T, opt);
    rec.period = T;
    rec.energy = model.H(z0);
    rec.closure_residual = (rec.trajectory.states.back() - z0).norm();
    if (rec.closure_residual > 1e-8)
        throw ValidationError("initial condition does not close after T (residual " +
                              std::to_string(rec.closure_residual) + ")");
    finish_record(rec, opt);
    return rec;
}

OrbitRecord cover(const OrbitRecord& orbit, int k) {
    if (k < 1) throw ValidationError("cover degree must be positive");
    IntegrateOptions io;
    io.reeb_time = orbit.trajectory.reeb_time;
    io.samples = static_cast<int>(k * (orbit.trajectory.size() - 1));
    OrbitRecord rec = orbit_from_initial_condition(orbit.trajectory.model, orbit.trajectory.states[0],
                                                   k * orbit.period, io);
    rec.start_involution = orbit.start_involution;
    rec.end_involution = orbit.end_involution;
    rec.fraction = orbit.fraction;
    rec.chord_time = orbit.chord_time;
    rec.chord_copies = k * orbit.chord_copies;
    return rec;
}

std::vector<std::string> symmetry_candidates(const SystemModel& model) {
    std::vector<std::string> out;
    for (const auto& inv : model.involutions)
        if (inv.kind == InvolutionKind::anti_symplectic) out.push_back(inv.label);
    if (model.cyclic_symmetry && !model.involutions.empty()) {
        const std::string& s = model.cyclic_symmetry->label;
        const std::string& base = model.involutions.front().label;
        for (int k = 1; k < model.cyclic_symmetry->order; ++k) {
            const std::string power = k == 1 ? s : s + std::to_string(k);
            out.push_back(power + "_" + base);
            out.push_back(power);
        }
    }
    return out;
}

void detect_symmetries(OrbitRecord& orbit, double tol) {
    const Trajectory& tr = orbit.trajectory;
    const SystemModel& model = tr.model;
    IntegrateOptions io;
    io.reeb_time = tr.reeb_time;
    const int n = static_cast<int>(tr.size()) - 1;
    orbit.symmetry.clear();
    for (const auto& label : symmetry_candidates(model)) {
        Mat4 R;
        bool anti = true;
        try {
            const Involution inv = model.involution(label);
            R = inv.matrix;
            anti = inv.kind == InvolutionKind::anti_symplectic;
        } catch (const ValidationError&) {
            R = model.symmetry_matrix(label);
            anti = false;
        }
        if ((R - Mat4::Identity()).norm() < 1e-12) continue;
        const auto [d, s] = distance_to_trace(tr, R * tr.states[0], io);
        if (d > tol) continue;
        const Trajectory y = resample(model, flow_endpoint(model, tr.states[0], s, io), tr.duration(), n, io);
        double res = 0.0;
        for (int j = 0; j <= n; ++j)
            res = std::max(res, (R * tr.states[j] - y.states[anti ? n - j : j]).norm());
        if (res < tol) orbit.symmetry.push_back({label, anti, s, res});
    }
    int anti_count = 0;
    for (const auto& m : orbit.symmetry) anti_count += m.anti_symplectic;
    orbit.sym_type = anti_count == 0   ? SymmetryType::nonsymmetric
                     : anti_count == 1 ? SymmetryType::symmetric
                                       : SymmetryType::doubly_symmetric;
}

OrbitRecord classify_symmetry(const OrbitRecord& orbit, const SystemModel& model) {
    std::string label;
    if (model.name == SystemName::pcr3bp)
        label = "rho";
    else if (model.name == SystemName::hill)
        label = "rho1";
    else
        throw ValidationError("type I/II classification needs a restricted three-body or Hill model");
    OrbitRecord out = orbit;
    if (out.symmetry.empty()) detect_symmetries(out);
    const auto it = std::find_if(out.symmetry.begin(), out.symmetry.end(),
                                 [&](const SymmetryMatch& m) { return m.label == label; });
    if (it == out.symmetry.end()) {
        out.kang_type.reset();
        if (model.name == SystemName::pcr3bp) out.sym_type = SymmetryType::nonsymmetric;
        return out;
    }
    const Trajectory& tr = out.trajectory;
    if (model.name == SystemName::pcr3bp) {
        // L1/L2 are defined on the component around the earth (origin)
        const Vec2 sun = model.singular_points.back();
        for (const auto& x : tr.states) {
            const Vec2 q(x(0), x(2));
            if (q.norm() >= (q - sun).norm()) {
                out.kang_type.reset();
                out.sym_type = SymmetryType::symmetric;
                return out;
            }
        }
    }
    IntegrateOptions io;
    io.reeb_time = tr.reeb_time;
    const double T = tr.duration();
    const double t1 = std::fmod(0.5 * it->shift, T);
    const double t2 = std::fmod(0.5 * it->shift + 0.5 * T, T);
    const Mat4 R = model.involution(label).matrix;
    const Vec4 c0 = flow_endpoint(model, tr.states[0], t1, io);
    const Vec4 c1 = flow_endpoint(model, tr.states[0], t2, io);
    if ((R * c0 - c0).norm() > 1e-6 || (R * c1 - c1).norm() > 1e-6)
        throw InternalError("half-chord endpoints are not on Fix(" + label + ")");
    if (std::abs(c0(0)) < 1e-9 || std::abs(c1(0)) < 1e-9)
        throw UnclassifiableError("chord endpoint within 1e-9 of the junction q1 = 0 of L1 and L2");
    const bool type_one = (c0(0) < 0) != (c1(0) < 0);
    out.kang_type = type_one ? "I" : "II";
    if (model.name == SystemName::pcr3bp) out.sym_type = type_one ? SymmetryType::type_I : SymmetryType::type_II;
    out.chart = "physical";
    return out;
}

void compute_indices(OrbitRecord& orbit, const IndexOptions& opt) {
    const Trajectory& tr = orbit.trajectory;
    if (tr.model.name == SystemName::pcr3bp || tr.model.name == SystemName::hill) {
        orbit.index_errors["global"] =
            "geometry: the physical chart is not star-shaped about the collision; indices need the regularized level";
        return;
    }
    IntegrateOptions io;
    io.reeb_time = tr.reeb_time;
    if (!orbit.monodromy) orbit.monodromy = integrate_variational(tr, io);
    const MonodromyPath& mono = *orbit.monodromy;
    auto record_error = [&](const std::string& key, const Error& e) {
        orbit.index_errors[key] = std::string(e.kind()) + ": " + e.what();
    };
    try {
        const auto frame = build_frame(tr, false, std::nullopt, opt.frame);
        const auto path = transverse_path(mono, frame);
        const IndexReport rot = cz_index_rotation(path);
        IndexReport rep = cz_index_spectral(*path.generator(), 1, opt.spectral);
        rep.rotation_number = rot.rotation_number;
        rep.residuals["rotation_method_mu_cz"] = *rot.mu_cz;
        if (rep.mu_cz != rot.mu_cz)
            throw InternalError("spectral and rotation indices disagree (" + std::to_string(*rep.mu_cz) +
                                " vs " + std::to_string(*rot.mu_cz) + ")");
        orbit.indices["global"] = rep;
    } catch (const Error& e) {
        record_error("global", e);
    }
    if (!opt.symmetric_frames) return;
    for (const auto& m : orbit.symmetry) {
        if (!m.anti_symplectic) continue;
        const std::string key = "symmetric:" + m.label;
        const Involution inv = tr.model.involution(m.label);
        if ((inv.matrix * tr.states[0] - tr.states[0]).norm() > 1e-9) continue;
        try {
            const auto frame = build_frame(tr, true, inv, opt.frame);
            const auto path = transverse_path(mono, frame);
            IndexReport rep = rs_index_spectral(*path.generator(), 1, opt.spectral);
            const IndexReport cross = rs_index_crossing(path);
            rep.residuals["crossing_method_mu_rs"] = *cross.mu_rs;
            if (rep.mu_rs != cross.mu_rs)
                throw InternalError("spectral and crossing indices disagree");
            try {
                rep.mu_cz = cz_index_rotation(path).mu_cz;
            } catch (const DegeneracyError&) {
            }
            orbit.indices[key] = rep;
        } catch (const Error& e) {
            record_error(key, e);
        }
    }
}

double polygon_linking(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    auto closed = [](const std::vector<Eigen::Vector3d>& c) {
        std::vector<Eigen::Vector3d> out = c;
        if (out.size() > 1 && (out.front() - out.back()).norm() < 1e-14) out.pop_back();
        return out;
    };
    const auto A = closed(a), B = closed(b);
    if (A.size() < 3 || B.size() < 3) throw ValidationError("linking needs closed polygons with >= 3 vertices");
    auto unit = [](const Eigen::Vector3d& v, bool& ok) {
        const double n = v.norm();
        ok = n > 1e-300;
        return ok ? Eigen::Vector3d(v / n) : v;
    };
    auto asin_clamped = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); };
    double total = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const Eigen::Vector3d& p1 = A[i];
        const Eigen::Vector3d& p2 = A[(i + 1) % A.size()];
        const Eigen::Vector3d r12 = p2 - p1;
        for (std::size_t j = 0; j < B.size(); ++j) {
            const Eigen::Vector3d& p3 = B[j];
            const Eigen::Vector3d& p4 = B[(j + 1) % B.size()];
            const Eigen::Vector3d r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2, r34 = p4 - p3;
            bool ok1, ok2, ok3, ok4;
            const Eigen::Vector3d n1 = unit(r13.cross(r14), ok1);
            const Eigen::Vector3d n2 = unit(r14.cross(r24), ok2);
            const Eigen::Vector3d n3 = unit(r24.cross(r23), ok3);
            const Eigen::Vector3d n4 = unit(r23.cross(r13), ok4);
            if (!(ok1 && ok2 && ok3 && ok4)) continue;
            const double omega = asin_clamped(n1.dot(n2)) + asin_clamped(n2.dot(n3)) +
                                 asin_clamped(n3.dot(n4)) + asin_clamped(n4.dot(n1));
            const double s = r34.cross(r12).dot(r13);
            total += s > 0 ? omega : (s < 0 ? -omega : 0.0);
        }
    }
    return total / (4.0 * kPi);
}

namespace {

LinkingResult sphere_linking_impl(const std::vector<Vec4>& a0, const std::vector<Vec4>& b0, double min_sep) {
    std::vector<Vec4> a, b;
    for (const auto& x : a0) a.push_back(x.normalized());
    for (const auto& x : b0) b.push_back(x.normalized());
    LinkingResult res;
    res.min_distance = 1e300;
    for (const auto& x : a)
        for (const auto& y : b) res.min_distance = std::min(res.min_distance, (x - y).norm());
    if (res.min_distance <= min_sep)
        throw GeometryError("curves are too close for a linking computation (distance " +
                            std::to_string(res.min_distance) + ")");

    // pole: farthest from both curves among a fixed pseudo-random sample of S^3
    std::mt19937_64 rng(0x51ab);
    std::normal_distribution<double> nd;
    Vec4 pole = Vec4::UnitX();
    double best = -1.0;
    for (int k = 0; k < 512; ++k) {
        const Vec4 c = Vec4(nd(rng), nd(rng), nd(rng), nd(rng)).normalized();
        double d = 1e300;
        for (const auto& x : a) d = std::min(d, (x - c).norm());
        for (const auto& x : b) d = std::min(d, (x - c).norm());
        if (d > best) {
            best = d;
            pole = c;
        }
    }
    // oriented basis of the tangent space at -pole: det(-pole, b1, b2, b3) > 0
    const Eigen::HouseholderQR<Eigen::Matrix<double, 4, 1>> qr(pole);
    const Mat4 basis = qr.householderQ();
    Mat4 frame;
    frame.col(0) = -pole;
    frame.rightCols<3>() = basis.rightCols<3>();
    if (frame.determinant() < 0) frame.col(1) = -frame.col(1);
    auto project = [&](const std::vector<Vec4>& c) {
        std::vector<Eigen::Vector3d> out;
        out.reserve(c.size());
        for (const auto& x : c) {
            const double den = 1.0 - x.dot(pole);
            out.emplace_back(frame.col(1).dot(x) / den, frame.col(2).dot(x) / den, frame.col(3).dot(x) / den);
        }
        return out;
    };
    res.raw = polygon_linking(project(a), project(b));
    res.value = static_cast<int>(std::lround(res.raw));
    return res;
}

}  // namespace

LinkingResult sphere_linking(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
    LinkingResult r = sphere_linking_impl(a, b, 1e-4);
    if (std::abs(r.raw - r.value) > 0.05)
        throw RefineError("linking integral " + std::to_string(r.raw) + " is not within 0.05 of an integer");
    return r;
}

LinkingResult linking_number(const OrbitRecord& a, const OrbitRecord& b) {
    return sphere_linking(a.trajectory.states, b.trajectory.states);
}

SelfLinkingResult self_linking(const OrbitRecord& orbit, const TrivializationFrame& frame, int cover_degree) {
    const auto& xs = orbit.trajectory.states;
    if (frame.times.size() != xs.size()) throw ValidationError("frame does not match the orbit samples");
    if (cover_degree < 1) throw ValidationError("cover degree must be positive");
    if (orbit.covering_number != 1 && cover_degree == 1)
        throw ValidationError("orbit is multiply covered; request the rational self-linking number");
    // curvature radius of the curve on S^3 (periodic central differences)
    const std::size_t n = xs.size() - 1;
    std::vector<Vec4> u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = xs[j].normalized();
    double rmin = 1e300;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec4 v = 0.5 * (u[(j + 1) % n] - u[(j + n - 1) % n]);
        const Vec4 acc = u[(j + 1) % n] - 2.0 * u[j] + u[(j + n - 1) % n];
        const double num = std::sqrt(std::max(0.0, v.squaredNorm() * acc.squaredNorm() - std::pow(v.dot(acc), 2)));
        if (num > 0) rmin = std::min(rmin, std::pow(v.norm(), 3) / num);
    }
    if (!(rmin < 1e300)) rmin = 1.0;
    std::vector<Vec4> curve(xs.begin(), xs.end() - 1);
    auto at_scale = [&](double eps) {
        std::vector<Vec4> push(n);
        for (std::size_t j = 0; j < n; ++j) push[j] = xs[j] + eps * frame.e1[j].normalized() * xs[j].norm();
        return sphere_linking_impl(curve, push, 0.1 * eps);
    };
    double eps = 1e-3 * std::min(1.0, rmin);
    LinkingResult prev = at_scale(eps);
    for (;;) {
        const double next = 0.5 * eps;
        if (next < 1e-5) throw RefineError("self-linking push-off does not stabilize above scale 1e-5");
        const LinkingResult cur = at_scale(next);
        const bool integral = std::abs(cur.raw - cur.value) < 0.05 && std::abs(prev.raw - prev.value) < 0.05;
        if (integral && cur.value == prev.value) {
            SelfLinkingResult out;
            out.raw = cur.raw;
            out.scale = next;
            out.cover = cover_degree;
            out.value = static_cast<double>(cur.value) / (cover_degree * cover_degree);
            return out;
        }
        prev = cur;
        eps = next;
    }
}

PredicateReport predicate_report(const OrbitRecord& orbit, const std::optional<SelfLinkingResult>& sl) {
    PredicateReport r;
    r.caveat = "unknottedness and the linking condition with other orbits are not certified; only sampled data is checked";
    r.simply_covered = orbit.covering_number == 1 ? Verdict::yes : Verdict::no;
    if (sl) {
        r.sl = sl->value;
        r.self_linking_minus_one = std::abs(sl->value + 1.0) < 1e-12 ? Verdict::yes : Verdict::no;
    } else {
        r.notes.push_back("self-linking not computed");
    }
    if (auto it = orbit.indices.find("global"); it != orbit.indices.end() && it->second.mu_cz) {
        r.mu_cz = *it->second.mu_cz;
        r.cz_at_least_three = *r.mu_cz >= 3 ? Verdict::yes : Verdict::no;
    } else if (auto e = orbit.index_errors.find("global"); e != orbit.index_errors.end()) {
        r.notes.push_back("mu_cz: " + e->second);
    } else {
        r.notes.push_back("mu_cz not computed");
    }
    for (const auto& [key, rep] : orbit.indices) {
        if (key.rfind("symmetric:", 0) != 0 || !rep.mu_rs) continue;
        if (!r.mu_rs || *rep.mu_rs > *r.mu_rs) r.mu_rs = rep.mu_rs;
    }
    if (r.mu_rs)
        r.rs_at_least_three_halves = *r.mu_rs >= 1.5 ? Verdict::yes : Verdict::no;
    for (const auto& [key, msg] : orbit.index_errors)
        if (key.rfind("symmetric:", 0) == 0) r.notes.push_back(key + ": " + msg);
    int anti = 0;
    for (const auto& m : orbit.symmetry) anti += m.anti_symplectic;
    r.symmetric = anti >= 1 ? Verdict::yes : Verdict::no;
    r.doubly_symmetric = anti >= 2 ? Verdict::yes : Verdict::no;
    return r;
}

}  // namespace symreeb
