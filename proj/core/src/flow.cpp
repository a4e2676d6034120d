#include "symreeb/flow.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <complex>

namespace symreeb {

namespace ode = boost::numeric::odeint;

namespace {

using State = std::array<double, 4>;
using VarState = std::array<double, 20>;

Vec4 to_vec(const double* a) { return Vec4(a[0], a[1], a[2], a[3]); }

int default_samples(double T) {
    int n = std::max(256, static_cast<int>(std::ceil(128.0 * T)));
    return n + (n % 2);
}

// Jacobian of the integrated field
Mat4 flow_jacobian(const SystemModel& m, const Vec4& z, bool reeb_time) {
    const Mat4 A = J4() * m.hessian(z);
    if (!reeb_time) return A;
    const Vec4 g = m.gradient(z);
    const Vec4 X = J4() * g;
    const double h = 0.5 * z.dot(g);
    const Vec4 dh = 0.5 * (g + m.hessian(z) * z);
    return A / h - X * dh.transpose() / (h * h);
}

template <class Stepper, class System, class StateT, class Observer>
void run_integration(Stepper stepper, System sys, StateT& x, std::vector<double>& times, double dt,
                     Observer obs, const SystemModel& model) {
    try {
        ode::integrate_times(stepper, sys, x, times.begin(), times.end(), dt, obs,
                             ode::max_step_checker(100000));
    } catch (const ode::step_adjustment_error& e) {
        throw CollisionError(std::string("step-size underflow (") + e.what() +
                             "); trajectory is probably near a collision");
    } catch (const ode::no_progress_error& e) {
        throw CollisionError(std::string("integrator made no progress (") + e.what() + ")");
    }
    (void)model;
}

}  // namespace

Vec4 flow_field(const SystemModel& model, const Vec4& z, bool reeb_time) {
    if (model.is_singular(z))
        throw CollisionError("trajectory entered the collision ball around a primary");
    const Vec4 X = J4() * model.gradient(z);
    if (!reeb_time) return X;
    const double h = lambda0(z, X);
    if (!(h > 0)) throw GeometryError("lambda0(X_H) <= 0: Reeb rescaling undefined");
    return X / h;
}

Vec4 Trajectory::velocity(std::size_t i) const { return flow_field(model, states[i], reeb_time); }

Trajectory integrate(const SystemModel& model, const Vec4& z0, double T,
                     const IntegrateOptions& opt) {
    if (!(T >= 0) || !std::isfinite(T)) throw ValidationError("integration time must be finite and >= 0");
    if (!z0.allFinite()) throw ValidationError("initial state is not finite");
    if (model.is_singular(z0)) throw DomainError("initial state lies in a collision ball");
    Trajectory tr;
    tr.model = model;
    tr.reeb_time = opt.reeb_time;
    if (T == 0.0) {
        tr.times = {0.0};
        tr.states = {z0};
        return tr;
    }
    int n = opt.samples > 0 ? opt.samples : default_samples(T);
    n += n % 2;
    tr.times.resize(n + 1);
    for (int j = 0; j <= n; ++j) tr.times[j] = T * j / n;
    tr.times[n] = T;
    tr.states.resize(n + 1);

    auto sys = [&](const State& x, State& dx, double) {
        const Vec4 v = flow_field(model, to_vec(x.data()), opt.reeb_time);
        for (int i = 0; i < 4; ++i) dx[i] = v(i);
    };
    State x{z0(0), z0(1), z0(2), z0(3)};
    std::size_t k = 0;
    auto obs = [&](const State& s, double) { tr.states[k++] = to_vec(s.data()); };
    run_integration(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>()),
                    sys, x, tr.times, T / (4.0 * n), obs, model);
    tr.states[0] = z0;

    const double h0 = model.H(z0);
    for (const auto& s : tr.states) tr.energy_drift = std::max(tr.energy_drift, std::abs(model.H(s) - h0));
    if (tr.energy_drift > opt.energy_tol)
        throw RefineError("energy drift " + std::to_string(tr.energy_drift) +
                          " exceeds tolerance; tighten rtol");
    return tr;
}

Vec4 flow_endpoint(const SystemModel& model, const Vec4& z0, double T, const IntegrateOptions& opt) {
    if (T == 0.0) return z0;
    auto sys = [&](const State& x, State& dx, double) {
        const Vec4 v = flow_field(model, to_vec(x.data()), opt.reeb_time);
        for (int i = 0; i < 4; ++i) dx[i] = v(i);
    };
    State x{z0(0), z0(1), z0(2), z0(3)};
    std::vector<double> times{0.0, T};
    run_integration(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>()),
                    sys, x, times, T / 64.0, [](const State&, double) {}, model);
    return to_vec(x.data());
}

std::pair<Vec4, Mat4> flow_endpoint_jacobian(const SystemModel& model, const Vec4& z0, double T,
                                             const IntegrateOptions& opt) {
    if (T == 0.0) return {z0, Mat4::Identity()};
    auto sys = [&](const VarState& s, VarState& ds, double) {
        const Vec4 x = to_vec(s.data());
        const Vec4 v = flow_field(model, x, opt.reeb_time);
        Eigen::Map<const Mat4> M(s.data() + 4);
        Eigen::Map<Mat4> dM(ds.data() + 4);
        for (int i = 0; i < 4; ++i) ds[i] = v(i);
        dM = flow_jacobian(model, x, opt.reeb_time) * M;
    };
    VarState s{};
    for (int i = 0; i < 4; ++i) s[i] = z0(i);
    Eigen::Map<Mat4>(s.data() + 4) = Mat4::Identity();
    std::vector<double> times{0.0, T};
    run_integration(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<VarState>()),
                    sys, s, times, T / 64.0, [](const VarState&, double) {}, model);
    return {to_vec(s.data()), Mat4(Eigen::Map<const Mat4>(s.data() + 4))};
}

MonodromyPath integrate_variational(const Trajectory& traj, const IntegrateOptions& opt) {
    MonodromyPath mp;
    mp.base = traj;
    mp.times = traj.times;
    mp.matrices.resize(traj.size());
    const SystemModel& model = traj.model;
    const bool reeb = traj.reeb_time;
    if (traj.size() == 1) {
        mp.matrices[0] = Mat4::Identity();
        return mp;
    }
    auto sys = [&](const VarState& s, VarState& ds, double) {
        const Vec4 x = to_vec(s.data());
        const Vec4 v = flow_field(model, x, reeb);
        const Mat4 A = flow_jacobian(model, x, reeb);
        Eigen::Map<const Mat4> M(s.data() + 4);
        Eigen::Map<Mat4> dM(ds.data() + 4);
        for (int i = 0; i < 4; ++i) ds[i] = v(i);
        dM = A * M;
    };
    VarState s{};
    for (int i = 0; i < 4; ++i) s[i] = traj.states[0](i);
    Eigen::Map<Mat4>(s.data() + 4) = Mat4::Identity();
    std::size_t k = 0;
    std::vector<double> times = traj.times;
    auto obs = [&](const VarState& st, double) { mp.matrices[k++] = Eigen::Map<const Mat4>(st.data() + 4); };
    run_integration(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<VarState>()),
                    sys, s, times, traj.duration() / (4.0 * traj.size()), obs, model);
    mp.matrices[0] = Mat4::Identity();
    const Mat4 J = J4();
    for (const auto& M : mp.matrices)
        mp.symplectic_defect = std::max(mp.symplectic_defect, (M.transpose() * J * M - J).norm());
    if (mp.symplectic_defect > 1e-6)
        throw RefineError("symplecticity drift " + std::to_string(mp.symplectic_defect) +
                          " in the variational equation");
    return mp;
}

namespace {

// u -> j u in canonical coordinates
Mat4 quaternion_j() {
    Mat4 L = Mat4::Zero();
    L(0, 2) = -1;
    L(1, 3) = 1;
    L(2, 0) = 1;
    L(3, 1) = -1;
    return L;
}

// (e, de) on S^3 for the unit point u moving with velocity du
struct SphereFrame {
    Vec4 e1, e2, de1, de2;
};

SphereFrame global_sphere_frame(const Vec4& u, const Vec4& du) {
    static const Mat4 L = quaternion_j();
    const Mat4 J = J4();
    SphereFrame f;
    f.e1 = L * u;
    f.de1 = L * du;
    f.e2 = J * f.e1;
    f.de2 = J * f.de1;
    return f;
}

SphereFrame reference_sphere_frame(const Vec4& u, const Vec4& du, const Vec4& v) {
    const Mat4 J = J4();
    const Vec4 Ju = J * u, Jdu = J * du;
    const Vec4 p = v - u.dot(v) * u - Ju.dot(v) * Ju;
    const Vec4 dp = -du.dot(v) * u - u.dot(v) * du - Jdu.dot(v) * Ju - Ju.dot(v) * Jdu;
    const double np = p.norm();
    SphereFrame f;
    f.e1 = p / np;
    f.de1 = (dp - f.e1 * f.e1.dot(dp)) / np;
    f.e2 = J * f.e1;
    f.de2 = J * f.de1;
    return f;
}

double reference_clearance(const Vec4& u, const Vec4& v) {
    const Vec4 Ju = J4() * u;
    return (v - u.dot(v) * u - Ju.dot(v) * Ju).norm();
}

// Liouville projection e -> e - (g.e / g.x) x onto the contact planes of the level
void project(const Vec4& x, const Vec4& dx, const Vec4& g, const Vec4& dg, const Vec4& e,
             const Vec4& de, Vec4& out, Vec4& dout) {
    const double s = g.dot(e), d = g.dot(x);
    const double ds = dg.dot(e) + g.dot(de), dd = dg.dot(x) + g.dot(dx);
    out = e - (s / d) * x;
    dout = de - ((ds * d - s * dd) / (d * d)) * x - (s / d) * dx;
}

Vec2 coords(const Vec4& v, const Vec4& e1, const Vec4& e2) {
    return Vec2(omega0(v, e2), omega0(e1, v));
}

// spectral derivative of uniform periodic samples on [0, T)
std::vector<double> periodic_derivative(const std::vector<double>& f, double T) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> c(n);
    for (int m = 0; m < n; ++m) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) acc += f[j] * std::polar(1.0, -kTwoPi * m * j / n);
        c[m] = acc / static_cast<double>(n);
    }
    std::vector<double> df(n, 0.0);
    for (int j = 0; j < n; ++j) {
        std::complex<double> acc = 0.0;
        for (int m = 0; m < n; ++m) {
            int freq = m <= n / 2 ? m : m - n;
            if (n % 2 == 0 && m == n / 2) freq = 0;  // drop the unpaired Nyquist mode
            acc += c[m] * std::complex<double>(0.0, kTwoPi * freq / T) *
                   std::polar(1.0, kTwoPi * m * j / n);
        }
        df[j] = acc.real();
    }
    return df;
}

}  // namespace

TrivializationFrame build_frame(const Trajectory& traj, bool symmetric,
                                const std::optional<Involution>& involution,
                                const FrameOptions& opt) {
    const std::size_t N = traj.size();
    if (N < 3) throw ValidationError("frame needs a sampled trajectory");
    const SystemModel& model = traj.model;
    TrivializationFrame fr;
    fr.times = traj.times;
    fr.kind = opt.kind;
    fr.e1.resize(N);
    fr.e2.resize(N);
    fr.de1.resize(N);
    fr.de2.resize(N);

    Vec4 ref = opt.reference;
    if (opt.kind == FrameKind::reference) {
        // fall back to other ambient directions if the contact planes get close to
        // being orthogonal to the requested one
        std::vector<Vec4> candidates{opt.reference};
        for (int i = 0; i < 4; ++i) candidates.push_back(Vec4::Unit(i));
        bool found = false;
        for (const auto& c : candidates) {
            double clear = 1e300;
            for (const auto& x : traj.states) clear = std::min(clear, reference_clearance(x / x.norm(), c));
            if (clear > 0.1) {
                ref = c;
                found = true;
                break;
            }
        }
        if (!found) throw GeometryError("reference frame degenerates along the orbit");
    }

    for (std::size_t i = 0; i < N; ++i) {
        const Vec4& x = traj.states[i];
        const Vec4 dx = traj.velocity(i);
        const double r = x.norm();
        const Vec4 u = x / r;
        const Vec4 du = (dx - u * u.dot(dx)) / r;
        const SphereFrame sf = opt.kind == FrameKind::global ? global_sphere_frame(u, du)
                                                             : reference_sphere_frame(u, du, ref);
        const Vec4 g = model.gradient(x);
        const Vec4 dg = model.hessian(x) * dx;
        const double d = g.dot(x);
        const double cond = g.norm() * r / d;
        if (!(d > 0) || cond > opt.max_condition)
            throw IllConditionedError("Liouville projection is ill-conditioned (condition " +
                                      std::to_string(cond) + "); level not star-shaped here");
        fr.max_condition = std::max(fr.max_condition, cond);
        project(x, dx, g, dg, sf.e1, sf.de1, fr.e1[i], fr.de1[i]);
        project(x, dx, g, dg, sf.e2, sf.de2, fr.e2[i], fr.de2[i]);
    }
    if (!symmetric) return fr;

    if (!involution || involution->kind != InvolutionKind::anti_symplectic)
        throw ValidationError("symmetric frame needs an anti-symplectic involution");
    const Mat4& R = involution->matrix;
    if ((R.transpose() * R - Mat4::Identity()).norm() > 1e-12)
        throw ValidationError("symmetric frame construction needs an orthogonal involution");
    const std::size_t n = N - 1;
    if (n % 2) throw ValidationError("symmetric frame needs an even number of intervals");
    double mirror = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
        mirror = std::max(mirror, (R * traj.states[j] - traj.states[n - j]).norm());
    if (mirror > 1e-6)
        throw ValidationError("trajectory is not R-symmetric about t = 0 (defect " +
                              std::to_string(mirror) + ")");

    // R maps the frame at t to I-conjugate coordinates at -t up to a rotation R(kappa)
    std::vector<double> kappa(n / 2 + 1);
    double ortho = 0.0;
    for (std::size_t j = 0; j <= n / 2; ++j) {
        const std::size_t m = n - j;
        Mat2 A;
        A.col(0) = coords(R * fr.e1[j], fr.e1[m], fr.e2[m]);
        A.col(1) = coords(R * fr.e2[j], fr.e1[m], fr.e2[m]);
        Mat2 I = Mat2::Identity();
        I(1, 1) = -1;
        const double k = std::atan2(A(1, 0), A(0, 0));
        Mat2 Rk;
        Rk << std::cos(k), -std::sin(k), std::sin(k), std::cos(k);
        ortho = std::max(ortho, (A - Rk * I).norm());
        kappa[j] = k;
    }
    if (ortho > 1e-6)
        throw InternalError("involution does not act on frame coordinates by a reflection");
    for (std::size_t j = 1; j < kappa.size(); ++j) {
        double d = kappa[j] - kappa[j - 1];
        d -= kTwoPi * std::round(d / kTwoPi);
        if (std::abs(d) > kPi / 2) throw RefineError("frame correction angle jumps; sample finer");
        kappa[j] = kappa[j - 1] + d;
    }
    std::vector<double> beta(N);
    for (std::size_t j = 0; j <= n / 2; ++j) beta[j] = beta[n - j] = 0.5 * kappa[j];
    const std::vector<double> b0(beta.begin(), beta.end() - 1);
    std::vector<double> db = periodic_derivative(b0, traj.duration());
    db.push_back(db.front());

    TrivializationFrame out = rotate_frame(fr, beta, db);
    out.symmetric = true;
    double res = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        res = std::max(res, (R * out.e1[j] - out.e1[n - j]).norm());
        res = std::max(res, (R * out.e2[j] + out.e2[n - j]).norm());
    }
    out.symmetry_residual = res;
    if (res > 1e-8)
        throw InternalError("symmetric frame violates the conjugation relation by " +
                            std::to_string(res));
    return out;
}

TrivializationFrame rotate_frame(const TrivializationFrame& f, const std::vector<double>& beta,
                                 const std::vector<double>& dbeta) {
    if (beta.size() != f.times.size() || dbeta.size() != f.times.size())
        throw ValidationError("rotation angles must match the frame samples");
    TrivializationFrame out = f;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double c = std::cos(beta[i]), s = std::sin(beta[i]);
        out.e1[i] = c * f.e1[i] + s * f.e2[i];
        out.e2[i] = -s * f.e1[i] + c * f.e2[i];
        out.de1[i] = c * f.de1[i] + s * f.de2[i] + dbeta[i] * out.e2[i];
        out.de2[i] = -s * f.de1[i] + c * f.de2[i] - dbeta[i] * out.e1[i];
    }
    out.winding_offset = f.winding_offset + static_cast<int>(std::lround((beta.back() - beta.front()) / kTwoPi));
    return out;
}

int relative_winding(const TrivializationFrame& f1, const TrivializationFrame& f2) {
    if (f1.times.size() != f2.times.size())
        throw ValidationError("frames must share their sample times");
    double total = 0.0;
    Vec2 prev = coords(f2.e1[0], f1.e1[0], f1.e2[0]);
    for (std::size_t i = 1; i < f1.times.size(); ++i) {
        const Vec2 cur = coords(f2.e1[i], f1.e1[i], f1.e2[i]);
        const double d = std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        if (std::abs(d) >= kPi / 2) throw RefineError("frames rotate too fast for the sampling");
        total += d;
        prev = cur;
    }
    const double w = total / kTwoPi;
    if (std::abs(w - std::round(w)) > 1e-6)
        throw ValidationError("relative winding is defined for frames along a closed orbit");
    return static_cast<int>(std::lround(w));
}

TransverseData transverse_data(const MonodromyPath& mono, const TrivializationFrame& frame) {
    const std::size_t N = mono.times.size();
    if (frame.times.size() != N) throw ValidationError("frame and monodromy samples differ");
    const std::size_t n = N - 1;
    if (n < 64 || n % 2) throw ValidationError("transverse path needs an even number >= 64 of intervals");
    const Trajectory& traj = mono.base;
    const double T = traj.duration();
    const Mat2 I = Vec2(1, -1).asDiagonal();

    Eigen::Matrix<double, 4, 2> E0;
    E0.col(0) = frame.e1[0];
    E0.col(1) = frame.e2[0];

    TransverseData out;
    std::vector<Mat2> Phi(N), S(N);
    for (std::size_t j = 0; j < N; ++j) {
        const Eigen::Matrix<double, 4, 2> ME = mono.matrices[j] * E0;
        Mat2 P;
        P.col(0) = coords(ME.col(0), frame.e1[j], frame.e2[j]);
        P.col(1) = coords(ME.col(1), frame.e1[j], frame.e2[j]);
        out.det_error = std::max(out.det_error, std::abs(P.determinant() - 1.0));
        Phi[j] = P;

        const Eigen::Matrix<double, 4, 2> Ec = ME * P.inverse();
        const Mat4 A = flow_jacobian(traj.model, traj.states[j], traj.reeb_time);
        Mat2 B;
        for (int c = 0; c < 2; ++c) {
            const Vec4 w = Ec.col(c);
            const Vec4 Aw = A * w;
            B(0, c) = omega0(w, frame.de2[j]) + omega0(Aw, frame.e2[j]);
            B(1, c) = omega0(frame.de1[j], w) + omega0(frame.e1[j], Aw);
        }
        B *= T;
        const Mat2 s = -J0() * B;
        out.matrix_asymmetry = std::max(out.matrix_asymmetry, std::abs(s(0, 1) - s(1, 0)));
        S[j] = 0.5 * (s + s.transpose());
    }
    if (out.det_error > 1e-8)
        throw RefineError("transverse path loses symplecticity (|det - 1| = " +
                          std::to_string(out.det_error) + ")");
    if (out.matrix_asymmetry > 1e-6 * std::max(1.0, T))
        throw RefineError("transverse generator is not symmetric (defect " +
                          std::to_string(out.matrix_asymmetry) + ")");

    std::vector<Mat2> loop(S.begin(), S.begin() + n);
    if (frame.symmetric) {
        for (std::size_t j = 0; j < n; ++j)
            out.mirror_defect = std::max(out.mirror_defect, (S[(n - j) % n] - I * S[j] * I).norm());
        if (out.mirror_defect > 1e-5 * std::max(1.0, T))
            throw RefineError("generator of the symmetric frame violates S(-t) = I S(t) I by " +
                              std::to_string(out.mirror_defect));
        for (std::size_t j = 0; j < n; ++j) loop[j] = 0.5 * (S[j] + I * S[(n - j) % n] * I);
    }

    std::vector<PathSample> samples(N);
    for (std::size_t j = 0; j < N; ++j) {
        samples[j].t = static_cast<double>(j) / n;
        samples[j].M = Phi[j] / std::sqrt(Phi[j].determinant());
    }
    samples[0].M = Mat2::Identity();
    samples[n].t = 1.0;
    out.path = SymplecticPath(std::move(samples), 1, SymmetricLoop(std::move(loop), frame.symmetric));
    return out;
}

SymplecticPath transverse_path(const MonodromyPath& mono, const TrivializationFrame& frame) {
    return transverse_data(mono, frame).path;
}

SymplecticPath iterate_path(const SymplecticPath& path, int k) {
    if (path.iterate_count() != 1) throw ValidationError("only paths on [0,1] can be iterated");
    if (k < 1) throw ValidationError("iterate count must be positive");
    const auto& s = path.samples();
    std::vector<PathSample> out;
    out.reserve(k * (s.size() - 1) + 1);
    Mat2 base = Mat2::Identity();
    for (int p = 0; p < k; ++p) {
        for (std::size_t j = (p == 0 ? 0 : 1); j < s.size(); ++j)
            out.push_back({p + s[j].t, s[j].M * base});
        base = s.back().M * base;
    }
    out.back().t = k;
    return SymplecticPath(std::move(out), k, path.generator());
}

}  // namespace symreeb
