#include "symreeb/sections.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace symreeb {

namespace ode = boost::numeric::odeint;

namespace {

using State = std::array<double, 4>;

double wrap(double a) { return std::remainder(a, kTwoPi); }

double phase2(const Vec4& x) { return std::atan2(x(3), x(2)); }

// d(arg z2)(X)
double phase_rate(const Vec4& x, const Vec4& X) {
    const double r2 = x(2) * x(2) + x(3) * x(3);
    return (x(2) * X(3) - x(3) * X(2)) / r2;
}

double level_scale(const SystemModel& m, const Vec4& u) { return std::sqrt(m.level / m.H(u)); }

void require_closed_form(const SystemModel& m) {
    if (m.name != SystemName::hopf && m.name != SystemName::ellipsoid)
        throw ValidationError("closed-form pages exist only for hopf and ellipsoid, not " +
                              to_string(m.name));
}

void require_interior(const Vec2& w) {
    if (!w.allFinite() || !(w.norm() < 1.0))
        throw ValidationError("section point must lie in the open unit disk");
}

template <class F>
void parallel_for(std::size_t n, int jobs, F work) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += jobs) work(i);
        });
    for (auto& th : pool) th.join();
}

// polar sample points in the open disk
std::vector<Vec2> polar_samples(int count) {
    const int rings = std::max(2, static_cast<int>(std::round(std::sqrt(count / 1.6))));
    const int spokes = std::max(4, (count + rings - 1) / rings);
    std::vector<Vec2> pts;
    for (int i = 0; i < rings; ++i) {
        const double r = 0.999 * (i + 0.5) / rings;
        for (int j = 0; j < spokes; ++j) {
            const double a = kTwoPi * (j + 0.5 * (i % 2)) / spokes;
            pts.emplace_back(r * std::cos(a), r * std::sin(a));
        }
    }
    return pts;
}

Vec2 z2_direction(const Mat4& R, double theta) {
    const Vec4 y = R * Vec4(0, 0, std::cos(theta), std::sin(theta));
    return Vec2(y(2), y(3));
}

}  // namespace

Vec4 SectionDisk::embed(const Vec2& w) const {
    const double s = std::sqrt(std::max(0.0, 1.0 - w.squaredNorm()));
    const Vec4 u(w(0), w(1), s * std::cos(theta), s * std::sin(theta));
    return level_scale(model, u) * u;
}

Vec2 SectionDisk::coordinates(const Vec4& x) const {
    const double n = x.norm();
    return Vec2(x(0), x(1)) / n;
}

double SectionDisk::page_distance(const Vec4& x, double phi) {
    const Vec4 u = x / x.norm();
    const double a = std::max(0.0, u(2) * std::cos(phi) + u(3) * std::sin(phi));
    const double best = std::sqrt(u(0) * u(0) + u(1) * u(1) + a * a);
    if (best < 1e-300) return std::sqrt(2.0);
    // nearest page point, compared componentwise to avoid cancellation
    const Vec4 p = Vec4(u(0), u(1), a * std::cos(phi), a * std::sin(phi)) / best;
    return (u - p).norm();
}

double SectionDisk::page_distance(const Vec4& x) const { return page_distance(x, theta); }

SectionDisk page(const SystemModel& model, double theta, int samples) {
    require_closed_form(model);
    if (!std::isfinite(theta)) throw ValidationError("page angle must be finite");
    SectionDisk d;
    d.model = model;
    d.theta = theta;
    d.boundary_period = kPi * model.parameter("r1sq");

    d.min_transversality = std::numeric_limits<double>::infinity();
    for (const Vec2& w : polar_samples(samples)) {
        const Vec4 x = d.embed(w);
        const double p = phase_rate(x, flow_field(model, x, false));
        if (!(p > 1e-4)) {
            std::ostringstream os;
            os << "page not transverse at w = (" << w(0) << ", " << w(1) << "): pairing " << p;
            throw GeometryError(os.str());
        }
        d.min_transversality = std::min(d.min_transversality, p);
    }

    // boundary circle is the orbit through (1, 0) on the level
    const Vec4 b0 = d.embed(Vec2(1, 0));
    for (int k = 1; k < 8; ++k) {
        const double t = d.boundary_period * k / 8.0;
        const Vec4 y = flow_endpoint(model, b0, t);
        const double a = std::atan2(y(1), y(0));
        const Vec4 expect = d.embed(Vec2(std::cos(a), std::sin(a)));
        if ((y - expect).norm() > 1e-8 || std::hypot(y(2), y(3)) > 1e-8)
            throw InternalError("page boundary does not follow the z1-circle orbit");
    }

    for (const auto& inv : model.involutions)
        if (invariance_check(d, inv).invariant) d.invariant_flag.push_back(inv.label);
    return d;
}

ReturnSample return_map(const SectionDisk& disk, const Vec2& w, const ReturnOptions& opt) {
    require_interior(w);
    const SystemModel& m = disk.model;
    const Vec4 x0 = disk.embed(w);
    const double horizon = opt.horizon_periods * disk.boundary_period;
    const double max_dt = 0.05 * disk.boundary_period;

    auto sys = [&m](const State& x, State& dx, double) {
        const Vec4 v = flow_field(m, Vec4(x[0], x[1], x[2], x[3]), false);
        for (int i = 0; i < 4; ++i) dx[i] = v(i);
    };
    auto stepper = ode::make_dense_output(opt.integration.atol, opt.integration.rtol, max_dt,
                                          ode::runge_kutta_dopri5<State>());
    State s{x0(0), x0(1), x0(2), x0(3)};
    stepper.initialize(s, 0.0, 1e-3 * disk.boundary_period);

    const double target = kTwoPi;
    double unwrapped = 0.0;
    double last_phase = phase2(x0);
    double min_rate = phase_rate(x0, flow_field(m, x0, false));
    State tmp;

    auto unwrapped_at = [&](double t, double base_phase, double base_unwrapped) {
        stepper.calc_state(t, tmp);
        const Vec4 y(tmp[0], tmp[1], tmp[2], tmp[3]);
        return base_unwrapped + wrap(phase2(y) - base_phase);
    };

    int steps = 0;
    while (true) {
        const auto [t0, t1] = stepper.do_step(sys);
        if (++steps > 10000000) throw NonReturnError("step budget exhausted before the first return");
        const State& cs = stepper.current_state();
        const Vec4 y(cs[0], cs[1], cs[2], cs[3]);
        const double ph = phase2(y);
        const double next = unwrapped + wrap(ph - last_phase);
        min_rate = std::min(min_rate, phase_rate(y, flow_field(m, y, false)));
        if (next <= -target)
            throw GeometryError("orbit crossed the page against its coorientation");
        if (next >= target) {
            double lo = t0, hi = t1;
            const double base_phase = last_phase, base_unwrapped = unwrapped;
            while (hi - lo > opt.time_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (unwrapped_at(mid, base_phase, base_unwrapped) >= target ? hi : lo) = mid;
            }
            ReturnSample r;
            r.point = w;
            r.tau = 0.5 * (lo + hi);
            r.min_phase_rate = min_rate;
            const Vec4 xt = flow_endpoint(m, x0, r.tau, opt.integration);
            r.image = disk.coordinates(xt);
            r.landing_residual = disk.page_distance(xt);
            const Vec4 xh = flow_endpoint(m, x0, 0.5 * r.tau, opt.integration);
            r.half_image = disk.coordinates(xh);
            r.half_residual = SectionDisk::page_distance(xh, disk.theta + kPi);
            return r;
        }
        unwrapped = next;
        last_phase = ph;
        if (t1 > horizon) {
            std::ostringstream os;
            os << "no return to the page within " << horizon << " (point (" << w(0) << ", " << w(1)
               << "))";
            throw NonReturnError(os.str());
        }
    }
}

std::vector<Vec2> interior_grid(int grid) {
    if (grid < 1) throw ValidationError("grid size must be positive");
    std::vector<Vec2> pts;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const Vec2 w(-0.9 + 1.8 * (i + 0.5) / grid, -0.9 + 1.8 * (j + 0.5) / grid);
            if (w.norm() < 0.95) pts.push_back(w);
        }
    return pts;
}

std::vector<ReturnSample> return_grid(const SectionDisk& disk, const std::vector<Vec2>& points,
                                      const ReturnOptions& opt, int jobs) {
    std::vector<ReturnSample> out(points.size());
    std::vector<std::string> errors(points.size());
    std::vector<int> kinds(points.size(), 0);
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        try {
            out[i] = return_map(disk, points[i], opt);
        } catch (const NonReturnError& e) {
            kinds[i] = 1;
            errors[i] = e.what();
        } catch (const Error& e) {
            kinds[i] = 2;
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (kinds[i] == 1) throw NonReturnError(errors[i]);
        if (kinds[i] == 2) throw GeometryError(errors[i]);
    }
    return out;
}

Vec2 act(const SectionDisk& disk, const Mat4& R, const Vec2& w) {
    const Vec4 y = R * disk.embed(w);
    if (disk.page_distance(y) > 1e-6) throw ValidationError("symmetry does not preserve the page");
    return disk.coordinates(y);
}

InvarianceResult invariance_check(const SectionDisk& disk, const Involution& inv, int samples) {
    InvarianceResult r;
    const Vec2 dir = z2_direction(inv.matrix, disk.theta);
    r.image_theta = std::atan2(dir(1), dir(0));
    const Mat4 Rinv = inv.matrix.inverse();
    for (const Vec2& w : polar_samples(samples)) {
        const Vec4 x = disk.embed(w);
        const Vec4 fwd = inv.matrix * x, back = Rinv * x;
        r.distance = std::max({r.distance, disk.page_distance(fwd), disk.page_distance(back)});
        // Hausdorff to the image page: R(D) against D_phi both ways
        const double s = std::sqrt(std::max(0.0, 1.0 - w.squaredNorm()));
        const Vec4 on_image(w(0), w(1), s * std::cos(r.image_theta), s * std::sin(r.image_theta));
        r.distance_to_image = std::max({r.distance_to_image,
                                        SectionDisk::page_distance(fwd, r.image_theta),
                                        disk.page_distance(Rinv * on_image)});
    }
    // boundary points are part of the closed page
    for (int k = 0; k < 64; ++k) {
        const double a = kTwoPi * k / 64;
        const Vec4 x = inv.matrix * disk.embed(Vec2(std::cos(a), std::sin(a)));
        r.distance = std::max(r.distance, disk.page_distance(x));
    }
    r.invariant = r.distance < 1e-6;
    return r;
}

namespace {

// unit direction of the fixed line of R restricted to the page
Vec2 fixed_arc_direction(const SectionDisk& disk, const Involution& inv) {
    const Mat4& R = inv.matrix;
    if (R.block<2, 2>(0, 2).norm() > 1e-12 || R.block<2, 2>(2, 0).norm() > 1e-12)
        throw ValidationError("fixed-arc search needs an involution preserving the z1 and z2 planes");
    const Mat2 B = R.block<2, 2>(0, 0);
    if ((B - B.transpose()).norm() > 1e-12 || std::abs(B.determinant() + 1) > 1e-12)
        throw ValidationError("involution does not act on the page as a reflection");
    Eigen::SelfAdjointEigenSolver<Mat2> es(B);
    const int k = std::abs(es.eigenvalues()(0) - 1) < std::abs(es.eigenvalues()(1) - 1) ? 0 : 1;
    (void)disk;
    return es.eigenvectors().col(k).normalized();
}

}  // namespace

FixedPointResult symmetric_fixed_point(const SectionDisk& disk, const Involution& inv,
                                       const ReturnOptions& opt, int scan) {
    if (inv.kind != InvolutionKind::anti_symplectic)
        throw ValidationError("symmetric fixed points need an anti-symplectic involution");
    if (!invariance_check(disk, inv).invariant)
        throw ValidationError("page is not invariant under " + inv.label);
    const double rev = reversibility_defect(disk, inv, interior_grid(4), opt);
    if (rev > 1e-6) {
        std::ostringstream os;
        os << "return map is not reversible on samples (defect " << rev << ")";
        throw ValidationError(os.str());
    }
    const Vec2 d = fixed_arc_direction(disk, inv);
    scan = std::max(4, scan);

    auto eval = [&](double s) { return return_map(disk, s * d, opt); };
    auto perp = [&](const ReturnSample& r) {
        const Vec2 D = r.image - r.point;
        return d(0) * D(1) - d(1) * D(0);
    };
    auto finish = [&](const ReturnSample& r, bool continuum) {
        FixedPointResult f;
        f.point = r.point;
        f.sample = r;
        f.displacement = (r.image - r.point).norm();
        const Vec4 x = disk.embed(r.point);
        f.involution_residual = (inv.matrix * x - x).norm();
        f.continuum = continuum;
        return f;
    };

    const double smax = 0.99;
    std::vector<ReturnSample> samples;
    std::vector<double> ss;
    double max_disp = 0;
    for (int i = 0; i <= scan; ++i) {
        const double s = -smax + 2 * smax * i / scan;
        samples.push_back(eval(s));
        ss.push_back(s);
        max_disp = std::max(max_disp, (samples.back().image - samples.back().point).norm());
    }
    if (max_disp < 1e-10) return finish(eval(0.0), true);

    for (int i = 0; i <= scan; ++i) {
        const double fi = perp(samples[i]);
        std::optional<ReturnSample> root;
        if (std::abs(fi) <= 1e-15) {
            root = samples[i];
        } else if (i < scan && fi * perp(samples[i + 1]) < 0) {
            double lo = ss[i], hi = ss[i + 1], flo = fi;
            ReturnSample mid_r = samples[i];
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                mid_r = eval(mid);
                const double fm = perp(mid_r);
                if (fm == 0) break;
                if (fm * flo < 0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            root = mid_r;
        }
        if (!root) continue;
        FixedPointResult f = finish(*root, false);
        if (f.displacement < 1e-8 && f.involution_residual < 1e-10) return f;
    }
    throw NotFoundError("no fixed point of the return map on the fixed arc of " + inv.label);
}

double reversibility_defect(const SectionDisk& disk, const Involution& inv,
                            const std::vector<Vec2>& points, const ReturnOptions& opt) {
    double worst = 0;
    for (const Vec2& w : points) {
        const Vec2 a = return_map(disk, w, opt).image;
        const Vec2 b = act(disk, inv.matrix, a);
        const Vec2 c = return_map(disk, b, opt).image;
        worst = std::max(worst, (c - act(disk, inv.matrix, w)).norm());
    }
    return worst;
}

double half_page_defect(const SectionDisk& disk, const std::vector<ReturnSample>& samples) {
    (void)disk;
    double worst = 0;
    for (const auto& s : samples) worst = std::max(worst, s.half_residual);
    return worst;
}

double area_defect(const SectionDisk& disk, const Vec2& w, double h, const ReturnOptions& opt) {
    require_interior(w);
    if (!(h > 0) || (w.norm() + h) >= 1.0) throw ValidationError("area stencil leaves the disk");
    const Vec2 e1(h, 0), e2(0, h);
    auto image = [&](const Vec2& p) { return disk.embed(return_map(disk, p, opt).image); };
    const Vec4 a = 0.5 * (disk.embed(w + e1) - disk.embed(w - e1));
    const Vec4 b = 0.5 * (disk.embed(w + e2) - disk.embed(w - e2));
    const Vec4 A = 0.5 * (image(w + e1) - image(w - e1));
    const Vec4 B = 0.5 * (image(w + e2) - image(w - e2));
    const double before = omega0(a, b), after = omega0(A, B);
    if (std::abs(before) < 1e-300) throw DegeneracyError("zero reference area");
    return std::abs(after - before) / std::abs(before);
}

void write_return_csv(std::ostream& os, const std::vector<ReturnSample>& samples, double tau_tol) {
    os << "u,v,tau,u_image,v_image,tau_tol,landing_residual\n";
    os << std::setprecision(17);
    for (const auto& s : samples)
        os << s.point(0) << ',' << s.point(1) << ',' << s.tau << ',' << s.image(0) << ','
           << s.image(1) << ',' << tau_tol << ',' << s.landing_residual << '\n';
}

void write_return_svg(std::ostream& os, const std::vector<ReturnSample>& samples) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : samples) {
        lo = std::min(lo, s.tau);
        hi = std::max(hi, s.tau);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const int size = 480;
    auto X = [&](double u) { return size / 2.0 + 0.45 * size * u; };
    auto Y = [&](double v) { return size / 2.0 - 0.45 * size * v; };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<circle cx=\"" << X(0) << "\" cy=\"" << Y(0) << "\" r=\"" << 0.45 * size
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << std::fixed << std::setprecision(2);
    for (const auto& s : samples) {
        const double f = (s.tau - lo) / span;
        const int red = static_cast<int>(std::round(255 * f)), blue = 255 - red;
        const std::string col = "rgb(" + std::to_string(red) + ",60," + std::to_string(blue) + ")";
        os << "<line x1=\"" << X(s.point(0)) << "\" y1=\"" << Y(s.point(1)) << "\" x2=\""
           << X(s.image(0)) << "\" y2=\"" << Y(s.image(1)) << "\" stroke=\"" << col
           << "\" stroke-opacity=\"0.35\"/>\n";
        os << "<circle cx=\"" << X(s.point(0)) << "\" cy=\"" << Y(s.point(1))
           << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    os << std::defaultfloat << std::setprecision(6);
    os << "<text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">tau in [" << lo
       << ", " << hi << "]</text>\n</svg>\n";
}

}  // namespace symreeb
