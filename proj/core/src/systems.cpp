#include "symreeb/systems.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace symreeb {

namespace {

// cos/sin with exact values at multiples of pi/2
std::pair<double, double> snapped_cos_sin(double a) {
    const double q = a / (kPi / 2);
    const double r = std::round(q);
    if (std::abs(q - r) < 1e-14) {
        const int k = ((static_cast<int>(r) % 4) + 4) % 4;
        static const double c[4] = {1, 0, -1, 0}, s[4] = {0, 1, 0, -1};
        return {c[k], s[k]};
    }
    return {std::cos(a), std::sin(a)};
}

Mat2 rot(double a) {
    const auto [c, s] = snapped_cos_sin(a);
    Mat2 m;
    m << c, -s, s, c;
    return m;
}

Mat4 blockdiag(const Mat2& a, const Mat2& b) {
    Mat4 m = Mat4::Zero();
    m.block<2, 2>(0, 0) = a;
    m.block<2, 2>(2, 2) = b;
    return m;
}

// 120 degree rotation of q = q1 + i q2 and p = p1 + i p2 in canonical order
Mat4 hh_sigma() {
    const Mat2 R = rot(kTwoPi / 3);
    Mat4 m = Mat4::Zero();
    // x1 = q1, y1 = p1, x2 = q2, y2 = p2
    m(0, 0) = R(0, 0); m(0, 2) = R(0, 1);
    m(2, 0) = R(1, 0); m(2, 2) = R(1, 1);
    m(1, 1) = R(0, 0); m(1, 3) = R(0, 1);
    m(3, 1) = R(1, 0); m(3, 3) = R(1, 1);
    return m;
}

Mat4 diag4(double a, double b, double c, double d) { return Vec4(a, b, c, d).asDiagonal(); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// potential -m / |q - c| : gradient and Hessian with respect to q
void add_kepler(const Vec2& q, const Vec2& c, double m, Vec2& g, Mat2& h) {
    const Vec2 d = q - c;
    const double r2 = d.squaredNorm(), r = std::sqrt(r2), r3 = r2 * r, r5 = r3 * r2;
    g += m * d / r3;
    h += m * (Mat2::Identity() / r3 - 3.0 * d * d.transpose() / r5);
}

// canonical z = (q1, p1, q2, p2)
Vec2 qpart(const Vec4& z) { return Vec2(z(0), z(2)); }

}  // namespace

std::string to_string(SystemName s) {
    switch (s) {
        case SystemName::hopf: return "hopf";
        case SystemName::ellipsoid: return "ellipsoid";
        case SystemName::pcr3bp: return "pcr3bp";
        case SystemName::hill: return "hill";
        case SystemName::henon_heiles: return "henon_heiles";
    }
    return "unknown";
}

SystemName system_from_string(const std::string& s) {
    if (s == "hopf") return SystemName::hopf;
    if (s == "ellipsoid") return SystemName::ellipsoid;
    if (s == "pcr3bp") return SystemName::pcr3bp;
    if (s == "hill") return SystemName::hill;
    if (s == "henon_heiles" || s == "henon-heiles") return SystemName::henon_heiles;
    throw ValidationError("unknown system '" + s + "'");
}

Mat4 antis_matrix(double theta1, double theta2) {
    auto block = [](double t) {
        const auto [c, s] = snapped_cos_sin(t);
        Mat2 m;
        m << c, s, s, -c;
        return m;
    };
    return blockdiag(block(theta1), block(theta2));
}

Mat4 g_matrix(int p, int q) {
    if (p < 1 || q < 1 || q > p) throw ValidationError("g_{p,q} needs p >= q >= 1");
    if (std::gcd(p, q) != 1) throw ValidationError("g_{p,q} needs coprime p and q");
    return blockdiag(rot(kTwoPi / p), rot(kTwoPi * q / p));
}

Involution make_involution(const Mat4& m, const std::string& label) {
    Involution inv;
    inv.matrix = m;
    inv.label = label;
    const Mat4 J = J4();
    if ((m.transpose() * J * m + J).norm() < 1e-12)
        inv.kind = InvolutionKind::anti_symplectic;
    else if ((m.transpose() * J * m - J).norm() < 1e-12)
        inv.kind = InvolutionKind::symplectic;
    else
        throw ValidationError("map '" + label + "' is neither symplectic nor anti-symplectic");
    if ((m * m - Mat4::Identity()).norm() > 1e-12)
        throw ValidationError("map '" + label + "' is not an involution");
    // Fix = range of the projector (Id + R)/2
    const Mat4 P = 0.5 * (Mat4::Identity() + m);
    Eigen::JacobiSVD<Mat4> svd(P, Eigen::ComputeFullU);
    int rank = 0;
    for (int i = 0; i < 4; ++i) rank += svd.singularValues()(i) > 0.5;
    inv.fixed_basis = svd.matrixU().leftCols(rank);
    for (int j = 0; j < rank; ++j) {
        Vec4 c = inv.fixed_basis.col(j);
        for (int i = 0; i < 4; ++i)
            if (std::abs(c(i)) < 1e-15) c(i) = 0.0;
        inv.fixed_basis.col(j) = c;
    }
    return inv;
}

bool SystemModel::is_singular(const Vec4& z) const {
    return distance_to_singular(z) < collision_radius;
}

double SystemModel::distance_to_singular(const Vec4& z) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : singular_points) d = std::min(d, (qpart(z) - s).norm());
    return d;
}

double SystemModel::parameter(const std::string& key) const {
    auto it = parameters.find(key);
    if (it == parameters.end())
        throw ValidationError("system " + to_string(name) + " has no parameter '" + key + "'");
    return it->second;
}

Mat4 SystemModel::symmetry_matrix(const std::string& label) const {
    if (label == "identity") return Mat4::Identity();
    if (label.rfind("g_", 0) == 0) {
        const auto parts = split(label, '_');
        if (parts.size() != 3) throw ValidationError("malformed label '" + label + "'");
        return g_matrix(std::stoi(parts[1]), std::stoi(parts[2]));
    }
    if (label.rfind("sigma", 0) == 0) {
        if (!cyclic_symmetry)
            throw ValidationError("system " + to_string(name) + " has no cyclic symmetry");
        const std::string pow = label.substr(5);
        const int j = pow.empty() ? 1 : std::stoi(pow);
        Mat4 m = Mat4::Identity();
        for (int i = 0; i < j; ++i) m = cyclic_symmetry->matrix * m;
        return m;
    }
    throw ValidationError("unknown symmetry label '" + label + "'");
}

Involution SystemModel::involution(const std::string& label) const {
    for (const auto& inv : involutions)
        if (inv.label == label) return inv;
    if (label == "rho" && !involutions.empty()) return involutions.front();
    if (label.rfind("antis_", 0) == 0) {
        const auto parts = split(label, '_');
        if (parts.size() != 3) throw ValidationError("malformed label '" + label + "'");
        return make_involution(antis_matrix(std::stod(parts[1]), std::stod(parts[2])), label);
    }
    if (label == "rho0") return make_involution(antis_matrix(kPi, kPi), label);
    // composites: "<sym>_rho" means sym o rho, "rho_sigma" is sigma o rho
    auto compose = [&](const std::string& sym, const std::string& base) {
        const Mat4 m = symmetry_matrix(sym) * involution(base).matrix;
        return make_involution(m, label);
    };
    if (label == "rho_sigma") return compose("sigma", "rho");
    const auto pos = label.rfind("_rho");
    if (pos != std::string::npos && pos > 0) {
        const std::string base = label.substr(pos + 1);
        return compose(label.substr(0, pos), base);
    }
    if (label.rfind("g_", 0) == 0 || label.rfind("sigma", 0) == 0) {
        const Mat4 m = symmetry_matrix(label);
        if ((m * m - Mat4::Identity()).norm() > 1e-12)
            throw ValidationError("'" + label + "' is a symmetry of order > 2, not an involution");
        return make_involution(m, label);
    }
    throw ValidationError("unknown involution label '" + label + "' for system " + to_string(name));
}

SystemModel make_ellipsoid(double r1sq, double r2sq) {
    if (!(r1sq > 0 && r2sq > 0)) throw ValidationError("ellipsoid radii must be positive");
    SystemModel m;
    m.name = SystemName::ellipsoid;
    m.parameters = {{"r1sq", r1sq}, {"r2sq", r2sq}};
    const Vec4 w(1 / r1sq, 1 / r1sq, 1 / r2sq, 1 / r2sq);
    m.hamiltonian = [w](const Vec4& z) { return z.cwiseProduct(z).dot(w); };
    m.gradient = [w](const Vec4& z) -> Vec4 { return 2.0 * z.cwiseProduct(w); };
    m.hessian = [w](const Vec4&) -> Mat4 { return (2.0 * w).asDiagonal(); };
    m.involutions = {make_involution(antis_matrix(0, 0), "rho")};
    m.level = 1.0;
    return m;
}

SystemModel make_hopf() {
    SystemModel m = make_ellipsoid(1.0, 1.0);
    m.name = SystemName::hopf;
    m.involutions = {make_involution(antis_matrix(0, kPi), "rho")};
    return m;
}

SystemModel make_pcr3bp(double mu, double c) {
    if (!(mu > 0 && mu < 1)) throw ValidationError("mass ratio must lie in (0,1)");
    SystemModel m;
    m.name = SystemName::pcr3bp;
    m.parameters = {{"mu", mu}, {"c", c}};
    const Vec2 E(0, 0), S(1, 0);
    m.hamiltonian = [=](const Vec4& z) {
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        const Vec2 q(q1, q2);
        return 0.5 * (p1 * p1 + p2 * p2) - (1 - mu) / (q - E).norm() - mu / (q - S).norm() +
               q1 * p2 - q2 * p1 - mu * p2;
    };
    auto potential = [=](const Vec2& q, Vec2& g, Mat2& h) {
        g.setZero();
        h.setZero();
        add_kepler(q, E, 1 - mu, g, h);
        add_kepler(q, S, mu, g, h);
    };
    m.gradient = [=](const Vec4& z) -> Vec4 {
        Vec2 g;
        Mat2 h;
        potential(qpart(z), g, h);
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        return Vec4(g(0) + p2, p1 - q2, g(1) - p1, p2 + q1 - mu);
    };
    m.hessian = [=](const Vec4& z) -> Mat4 {
        Vec2 g;
        Mat2 h;
        potential(qpart(z), g, h);
        Mat4 H = Mat4::Zero();
        H(0, 0) = h(0, 0); H(0, 2) = h(0, 1); H(2, 0) = h(1, 0); H(2, 2) = h(1, 1);
        H(1, 1) = 1; H(3, 3) = 1;
        H(0, 3) = H(3, 0) = 1;    // q1 p2
        H(2, 1) = H(1, 2) = -1;   // -q2 p1
        return H;
    };
    m.involutions = {make_involution(diag4(1, -1, -1, 1), "rho")};
    m.singular_points = {E, S};
    m.level = c;
    return m;
}

SystemModel make_hill(double c) {
    SystemModel m;
    m.name = SystemName::hill;
    m.parameters = {{"c", c}};
    m.hamiltonian = [](const Vec4& z) {
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        return 0.5 * (p1 * p1 + p2 * p2) + q1 * p2 - q2 * p1 - 1 / std::hypot(q1, q2) - q1 * q1 +
               0.5 * q2 * q2;
    };
    m.gradient = [](const Vec4& z) -> Vec4 {
        Vec2 g = Vec2::Zero();
        Mat2 h = Mat2::Zero();
        add_kepler(qpart(z), Vec2::Zero(), 1.0, g, h);
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        return Vec4(g(0) + p2 - 2 * q1, p1 - q2, g(1) - p1 + q2, p2 + q1);
    };
    m.hessian = [](const Vec4& z) -> Mat4 {
        Vec2 g = Vec2::Zero();
        Mat2 h = Mat2::Zero();
        add_kepler(qpart(z), Vec2::Zero(), 1.0, g, h);
        Mat4 H = Mat4::Zero();
        H(0, 0) = h(0, 0) - 2; H(0, 2) = h(0, 1); H(2, 0) = h(1, 0); H(2, 2) = h(1, 1) + 1;
        H(1, 1) = 1; H(3, 3) = 1;
        H(0, 3) = H(3, 0) = 1;
        H(2, 1) = H(1, 2) = -1;
        return H;
    };
    m.involutions = {make_involution(diag4(1, -1, -1, 1), "rho1"),
                     make_involution(diag4(-1, 1, 1, -1), "rho2")};
    m.singular_points = {Vec2::Zero()};
    m.level = c;
    return m;
}

SystemModel make_henon_heiles(double c) {
    SystemModel m;
    m.name = SystemName::henon_heiles;
    m.parameters = {{"c", c}};
    m.hamiltonian = [](const Vec4& z) {
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 -
               q2 * q2 * q2 / 3.0;
    };
    m.gradient = [](const Vec4& z) -> Vec4 {
        const double q1 = z(0), p1 = z(1), q2 = z(2), p2 = z(3);
        return Vec4(q1 + 2 * q1 * q2, p1, q2 + q1 * q1 - q2 * q2, p2);
    };
    m.hessian = [](const Vec4& z) -> Mat4 {
        const double q1 = z(0), q2 = z(2);
        Mat4 H = Mat4::Zero();
        H(0, 0) = 1 + 2 * q2;
        H(0, 2) = H(2, 0) = 2 * q1;
        H(2, 2) = 1 - 2 * q2;
        H(1, 1) = H(3, 3) = 1;
        return H;
    };
    m.involutions = {make_involution(diag4(-1, 1, 1, -1), "rho")};
    m.cyclic_symmetry = CyclicSymmetry{hh_sigma(), 3, "sigma"};
    m.level = c;
    return m;
}

SystemModel make_system(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&](const std::string& k, std::optional<double> def = std::nullopt) {
        auto it = params.find(k);
        if (it != params.end()) return it->second;
        if (def) return *def;
        throw ValidationError("system '" + name + "' needs parameter '" + k + "'");
    };
    switch (system_from_string(name)) {
        case SystemName::hopf: return make_hopf();
        case SystemName::ellipsoid:
            return make_ellipsoid(get("r1sq", 1.0), get("r2sq", 0.5 * (1 + std::sqrt(5.0))));
        case SystemName::pcr3bp: return make_pcr3bp(get("mu"), get("c"));
        case SystemName::hill: return make_hill(get("c"));
        case SystemName::henon_heiles: return make_henon_heiles(get("c"));
    }
    throw ValidationError("unknown system '" + name + "'");
}

Vec4 hamiltonian_vector_field(const SystemModel& model, const Vec4& z) {
    if (model.is_singular(z)) throw DomainError("vector field requested at a collision point");
    return J4() * model.gradient(z);
}

double reeb_rescaling(const SystemModel& model, const Vec4& z) {
    const double v = lambda0(z, hamiltonian_vector_field(model, z));
    if (!(v > 0))
        throw GeometryError("lambda0(X_H) = " + std::to_string(v) +
                            " is not positive; level is not star-shaped here");
    return v;
}

double SphereModel::radius(const Vec4& u) const {
    const double c = base.level;
    auto g = [&](double r) { return base.H(r * u) - c; };
    if (!(g(0.0) < 0)) throw GeometryError("origin is not inside the level set");
    double lo = 0.0, step = 1e-2, hi = step;
    while (g(hi) < 0) {
        lo = hi;
        hi += step;
        step *= 1.1;
        if (hi > 1e4) throw GeometryError("ray from the origin does not meet the level");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0 ? lo : hi) = mid;
    }
    double r = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double d = base.gradient(r * u).dot(u);
        if (d <= 0) break;
        r -= g(r) / d;
    }
    return r;
}

Vec4 SphereModel::from_sphere(const Vec4& u) const { return radius(u) * u; }

Mat4 henon_heiles_chart() {
    const double s = 1.0 / std::sqrt(2.0);
    Mat4 m;
    // rows: Q1, P1, Q2, P2 ; columns: q1, p1, q2, p2
    m << 1, 0, 0, -1,
         0, 1, 1, 0,
        -1, 0, 0, -1,
         0, -1, 1, 0;
    return s * m;
}

SphereModel pullback_to_sphere(const SystemModel& model, int samples) {
    if (model.name == SystemName::pcr3bp || model.name == SystemName::hill)
        throw GeometryError("levels of " + to_string(model.name) +
                            " are not star-shaped in R^4; use the Levi-Civita chart");
    SphereModel s;
    s.base = model;
    s.involutions = model.involutions;
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> n(0.0, 1.0);
    double minp = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        Vec4 u(n(rng), n(rng), n(rng), n(rng));
        u.normalize();
        const Vec4 x = s.from_sphere(u);
        const double pairing = x.dot(model.gradient(x));
        if (!(pairing > 0)) {
            std::ostringstream os;
            os << "level is not star-shaped: <z, grad H> = " << pairing << " at z = ("
               << x.transpose() << ")";
            throw GeometryError(os.str());
        }
        minp = std::min(minp, pairing);
    }
    s.min_radial_pairing = minp;
    if (model.name == SystemName::henon_heiles) {
        s.chart = henon_heiles_chart();
        const Mat4 inv = s.chart.inverse();
        for (const auto& r : model.involutions)
            s.chart_involutions.push_back(make_involution(s.chart * r.matrix * inv, r.label));
        if (model.cyclic_symmetry)
            s.chart_cyclic = CyclicSymmetry{s.chart * model.cyclic_symmetry->matrix * inv,
                                            model.cyclic_symmetry->order,
                                            model.cyclic_symmetry->label};
    } else {
        s.chart_involutions = s.involutions;
        s.chart_cyclic = model.cyclic_symmetry;
    }
    return s;
}

Vec4 levi_civita_lift(const Vec4& base) {
    const std::complex<double> q(base(0), base(2)), p(base(1), base(3));
    if (std::abs(q) == 0.0) throw DomainError("Levi-Civita lift is undefined at collision");
    const std::complex<double> v = std::sqrt(q / 2.0);
    const std::complex<double> u = p * std::conj(v);
    return Vec4(v.real(), u.real(), v.imag(), u.imag());
}

Vec4 levi_civita_project(const Vec4& lifted) {
    const std::complex<double> v(lifted(0), lifted(2)), u(lifted(1), lifted(3));
    if (std::abs(v) == 0.0) throw DomainError("Levi-Civita map is undefined at v = 0");
    const std::complex<double> q = 2.0 * v * v, p = u / std::conj(v);
    return Vec4(q.real(), p.real(), q.imag(), p.imag());
}

Mat4 levi_civita_rho1() { return diag4(1, -1, -1, 1); }
Mat4 levi_civita_rho2() { return diag4(-1, 1, 1, -1); }

namespace {

std::vector<Vec4> critical_seeds(const SystemModel& model) {
    std::vector<Vec4> seeds;
    auto add_q = [&](double q1, double q2, double p1, double p2) {
        seeds.push_back(from_mechanical(q1, q2, p1, p2));
    };
    switch (model.name) {
        case SystemName::pcr3bp: {
            const double mu = model.parameter("mu");
            auto seed = [&](double q1, double q2) { add_q(q1, q2, q2, mu - q1); };
            for (double q1 = -2.5; q1 < -0.01; q1 += 0.05) seed(q1, 0);
            for (double q1 = 0.025; q1 < 0.98; q1 += 0.05) seed(q1, 0);
            for (double q1 = 1.025; q1 < 3.0; q1 += 0.05) seed(q1, 0);
            seed(0.5, std::sqrt(3.0) / 2);
            seed(0.5, -std::sqrt(3.0) / 2);
            break;
        }
        case SystemName::hill: {
            auto seed = [&](double q1, double q2) { add_q(q1, q2, q2, -q1); };
            for (double q1 = 0.1; q1 < 3.0; q1 += 0.1) {
                seed(q1, 0);
                seed(-q1, 0);
            }
            break;
        }
        case SystemName::henon_heiles:
            for (double a = -1.5; a <= 1.5001; a += 0.25)
                for (double b = -1.5; b <= 1.5001; b += 0.25) add_q(a, b, 0, 0);
            break;
        default:
            throw ValidationError("critical values are defined for pcr3bp, hill, henon_heiles");
    }
    return seeds;
}

}  // namespace

std::vector<CriticalPoint> critical_points(const SystemModel& model) {
    const auto seeds = critical_seeds(model);
    std::vector<CriticalPoint> found;
    for (const Vec4& s : seeds) {
        Vec4 x = s;
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
            if (model.distance_to_singular(x) < 1e-3 || !x.allFinite() || x.norm() > 1e3) break;
            const Vec4 g = model.gradient(x);
            if (g.norm() < 1e-13) {
                ok = true;
                break;
            }
            const auto lu = model.hessian(x).fullPivLu();
            if (!lu.isInvertible()) break;
            x -= lu.solve(g);
        }
        if (!ok) {
            if (!x.allFinite() || model.distance_to_singular(x) < 1e-3) continue;
            if (model.gradient(x).norm() >= 1e-10) continue;
        }
        const double gn = model.gradient(x).norm();
        const bool dup = std::any_of(found.begin(), found.end(), [&](const CriticalPoint& c) {
            return (c.point - x).norm() < 1e-8;
        });
        if (!dup) found.push_back({x, model.H(x), gn});
    }
    if (found.empty()) {
        std::ostringstream os;
        os << "Newton diverged from all " << seeds.size() << " seeds";
        for (std::size_t i = 0; i < std::min<std::size_t>(seeds.size(), 8); ++i)
            os << (i ? ", " : ": ") << "(" << seeds[i].transpose() << ")";
        throw NotFoundError(os.str());
    }
    std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.value < b.value || (a.value == b.value && a.point(0) < b.point(0));
    });
    return found;
}

std::vector<double> critical_values(const SystemModel& model) {
    std::vector<double> vals;
    for (const auto& c : critical_points(model))
        if (vals.empty() || std::abs(c.value - vals.back()) > 1e-9 * std::max(1.0, std::abs(c.value)))
            vals.push_back(c.value);
    return vals;
}

}  // namespace symreeb
