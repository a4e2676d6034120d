#pragma once

#include "symreeb/common.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symreeb {

enum class SystemName { hopf, ellipsoid, pcr3bp, hill, henon_heiles };
std::string to_string(SystemName s);
SystemName system_from_string(const std::string& s);

enum class InvolutionKind { anti_symplectic, symplectic };

/// Linear symmetry of phase space. For anti-symplectic maps the fixed set is a
/// Lagrangian plane spanned by the columns of fixed_basis.
struct Involution {
    Mat4 matrix;
    InvolutionKind kind;
    std::string label;
    Eigen::Matrix<double, 4, Eigen::Dynamic> fixed_basis;

    Vec4 operator()(const Vec4& z) const { return matrix * z; }
    Vec4 fixed_point(const Eigen::VectorXd& coords) const { return fixed_basis * coords; }
    bool fixes(const Vec4& z, double tol = 1e-12) const { return (matrix * z - z).norm() <= tol; }
};

/// Builds an involution record, classifying it by the J4-conjugation test.
Involution make_involution(const Mat4& m, const std::string& label);

/// (z1, z2) -> (e^{i t1} conj z1, e^{i t2} conj z2)
Mat4 antis_matrix(double theta1, double theta2);
/// (z1, z2) -> (e^{2 pi i/p} z1, e^{2 pi i q/p} z2)
Mat4 g_matrix(int p, int q);

struct CyclicSymmetry {
    Mat4 matrix;
    int order;
    std::string label;
};

struct CriticalPoint {
    Vec4 point;
    double value;
    double gradient_norm;
};

/// A Hamiltonian system on R^4 with its symmetries and energy level.
class SystemModel {
public:
    SystemName name;
    std::map<std::string, double> parameters;
    std::function<double(const Vec4&)> hamiltonian;
    std::function<Vec4(const Vec4&)> gradient;
    std::function<Mat4(const Vec4&)> hessian;
    std::vector<Involution> involutions;
    std::optional<CyclicSymmetry> cyclic_symmetry;
    /// collision points in the (q1, q2) plane, i.e. coordinates (x1, x2)
    std::vector<Vec2> singular_points;
    double collision_radius = 1e-6;
    double level = 1.0;

    double H(const Vec4& z) const { return hamiltonian(z); }
    bool is_singular(const Vec4& z) const;
    double distance_to_singular(const Vec4& z) const;
    double parameter(const std::string& key) const;

    /// Resolves "rho", "rho1", "rho2", "rho0", "sigma", "sigma_rho", "sigma2_rho",
    /// "rho_sigma" (= sigma o rho), "g_p_q", "antis_t1_t2", "identity".
    Involution involution(const std::string& label) const;
    /// Matrix of a symplectic symmetry label ("sigma", "sigma2", "g_p_q").
    Mat4 symmetry_matrix(const std::string& label) const;
};

SystemModel make_hopf();
SystemModel make_ellipsoid(double r1sq, double r2sq);
SystemModel make_pcr3bp(double mu, double c);
SystemModel make_hill(double c);
SystemModel make_henon_heiles(double c);

/// Builds a model from a name and parameter map (keys: r1sq, r2sq, mu, c).
SystemModel make_system(const std::string& name, const std::map<std::string, double>& params);

/// X_H with i_{X_H} omega0 = -dH, i.e. X_H = J4 grad H.
Vec4 hamiltonian_vector_field(const SystemModel& model, const Vec4& z);

/// lambda0(X_H)(z); the Reeb field on a star-shaped level is X_H divided by this.
double reeb_rescaling(const SystemModel& model, const Vec4& z);

/// Star-shaped level presented over the unit sphere: Psi(u) = r(u) u lands on
/// the level and Psi^*(lambda0) = f lambda0 with f = r^2.
class SphereModel {
public:
    SystemModel base;
    /// anti-symplectic and cyclic symmetries of the level, restricted to S^3
    std::vector<Involution> involutions;
    /// Linear contactomorphism used to present the symmetries in normal form
    /// (Henon-Heiles), identity otherwise.
    Mat4 chart = Mat4::Identity();
    std::vector<Involution> chart_involutions;
    std::optional<CyclicSymmetry> chart_cyclic;
    double min_radial_pairing = 0.0;

    double radius(const Vec4& u) const;
    double f(const Vec4& u) const { const double r = radius(u); return r * r; }
    Vec4 from_sphere(const Vec4& u) const;
    static Vec4 to_sphere(const Vec4& x) { return x / x.norm(); }
};

/// Checks star-shapedness on a deterministic sample of directions and returns
/// the spherical presentation; throws GeometryError naming a violating sample.
SphereModel pullback_to_sphere(const SystemModel& model, int samples = 2000);

/// Henon-Heiles chart (q1,q2,p1,p2) -> (q1-p2, -q1-p2, q2+p1, q2-p1)/sqrt2 in canonical order.
Mat4 henon_heiles_chart();

/// Levi-Civita map q = 2 v^2, p = u / conj(v). Base points are (q1,p1,q2,p2)
/// and lifted points (v1,u1,v2,u2), both in canonical order.
Vec4 levi_civita_lift(const Vec4& base);
Vec4 levi_civita_project(const Vec4& lifted);
/// Lifts of the base involution: rho1 = diag(1,-1,-1,1), rho2 = diag(-1,1,1,-1).
Mat4 levi_civita_rho1();
Mat4 levi_civita_rho2();

/// Newton-refined critical points of H (pcr3bp, hill, henon_heiles).
std::vector<CriticalPoint> critical_points(const SystemModel& model);
/// Distinct critical values in increasing order.
std::vector<double> critical_values(const SystemModel& model);

/// (q1, q2, p1, p2) in canonical order.
inline Vec4 from_mechanical(double q1, double q2, double p1, double p2) {
    return Vec4(q1, p1, q2, p2);
}

}  // namespace symreeb
