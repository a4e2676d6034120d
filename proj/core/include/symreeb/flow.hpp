#pragma once

#include "symreeb/sympath.hpp"
#include "symreeb/systems.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace symreeb {

struct IntegrateOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    /// number of uniform output intervals (made even); 0 picks max(256, 128 T)
    int samples = 0;
    /// integrate R = X_H / lambda0(X_H) instead of X_H
    bool reeb_time = false;
    /// accepted trajectories have max |H(x(t)) - H(x(0))| below this
    double energy_tol = 1e-9;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec4> states;
    double energy_drift = 0.0;
    bool reeb_time = false;
    SystemModel model;

    double duration() const { return times.back(); }
    std::size_t size() const { return times.size(); }
    Vec4 velocity(std::size_t i) const;
};

struct MonodromyPath {
    std::vector<double> times;
    std::vector<Mat4> matrices;
    double symplectic_defect = 0.0;
    Trajectory base;
};

/// Vector field actually integrated: X_H or the Reeb field.
Vec4 flow_field(const SystemModel& model, const Vec4& z, bool reeb_time);

Trajectory integrate(const SystemModel& model, const Vec4& z0, double T,
                     const IntegrateOptions& opt = {});

/// Endpoint of the flow after time T (no sampling, no drift check).
Vec4 flow_endpoint(const SystemModel& model, const Vec4& z0, double T,
                   const IntegrateOptions& opt = {});

/// Endpoint together with the linearized flow D phi^T(z0).
std::pair<Vec4, Mat4> flow_endpoint_jacobian(const SystemModel& model, const Vec4& z0, double T,
                                             const IntegrateOptions& opt = {});

/// Solves dM/dt = DX(x(t)) M, M(0) = Id along the trajectory.
MonodromyPath integrate_variational(const Trajectory& traj, const IntegrateOptions& opt = {});

enum class FrameKind { global, reference };

/// Frame of the contact planes along a trajectory. e1, e2 span ker lambda0 on
/// the level and satisfy omega0(e1, e2) = 1; de1, de2 are their derivatives
/// along the flow (per unit trajectory time).
struct TrivializationFrame {
    std::vector<double> times;
    std::vector<Vec4> e1, e2, de1, de2;
    bool symmetric = false;
    /// winding of the global frame measured in this frame's coordinates
    int winding_offset = 0;
    FrameKind kind = FrameKind::global;
    double max_condition = 1.0;
    double symmetry_residual = 0.0;
};

struct FrameOptions {
    FrameKind kind = FrameKind::global;
    /// ambient vector for FrameKind::reference
    Vec4 reference = Vec4(0, 0, 1, 0);
    double max_condition = 1e6;
};

/// Global frame (j z, k z) on S^3 transported to the level by the Liouville
/// projection, optionally rotated into a symmetric frame for the involution.
/// The symmetric version needs R x(t) = x(T - t) on the samples.
TrivializationFrame build_frame(const Trajectory& traj, bool symmetric,
                                const std::optional<Involution>& involution = std::nullopt,
                                const FrameOptions& opt = {});

/// Frame rotated pointwise by beta(t): (e1, e2) R(beta).
TrivializationFrame rotate_frame(const TrivializationFrame& f, const std::vector<double>& beta,
                                 const std::vector<double>& dbeta);

/// wind(F1, F2): turns of F2's first vector in F1's coordinates, so that
/// mu_RS^{F1} = mu_RS^{F2} + wind(F1, F2) and mu_CZ shifts by twice that.
int relative_winding(const TrivializationFrame& f1, const TrivializationFrame& f2);

struct TransverseData {
    SymplecticPath path;
    double det_error = 0.0;          // max |det Phi - 1| before normalization
    double matrix_asymmetry = 0.0;   // max |S - S^T| before symmetrization
    double mirror_defect = 0.0;      // max |S(-t) - I S(t) I| (symmetric frames)
};

/// Phi(s) = T(x(sT)) o dphi^{sT}(x(0))|xi o T(x(0))^{-1} on [0, 1] with its generator.
TransverseData transverse_data(const MonodromyPath& mono, const TrivializationFrame& frame);
SymplecticPath transverse_path(const MonodromyPath& mono, const TrivializationFrame& frame);

/// Extends a path on [0,1] to [0,k] by Phi(t + 1) = Phi(t) Phi(1).
SymplecticPath iterate_path(const SymplecticPath& path, int k);

}  // namespace symreeb
