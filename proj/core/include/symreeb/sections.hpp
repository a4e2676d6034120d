#pragma once

#include "symreeb/flow.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace symreeb {

/// Page {arg z2 = theta} of the open book bounded by the z1-circle, on the
/// round sphere (hopf) or its radial image on the ellipsoid.
/// Disk coordinate w is the z1 component of the point on S^3.
struct SectionDisk {
    SystemModel model;
    double theta = 0.0;
    std::vector<std::string> invariant_flag;
    double boundary_period = 0.0;
    double min_transversality = 0.0;  // min of d(arg z2)(X) over the sample grid

    Vec4 embed(const Vec2& w) const;
    Vec2 coordinates(const Vec4& x) const;
    /// distance on S^3 between x/|x| and the round page
    double page_distance(const Vec4& x) const;
    /// distance between x/|x| and the page of angle phi
    static double page_distance(const Vec4& x, double phi);
};

/// Builds the page for hopf/ellipsoid models and checks transversality on
/// about `samples` interior points.
SectionDisk page(const SystemModel& model, double theta, int samples = 1000);

struct ReturnSample {
    Vec2 point = Vec2::Zero();
    Vec2 image = Vec2::Zero();
    Vec2 half_image = Vec2::Zero();  // on the page theta + pi
    double tau = 0.0;
    double landing_residual = 0.0;
    double half_residual = 0.0;      // distance of the half image to the opposite page
    double min_phase_rate = 0.0;     // > 0 certifies the return is the first one
};

struct ReturnOptions {
    double horizon_periods = 1e3;
    double time_tol = 1e-12;
    IntegrateOptions integration{};
};

ReturnSample return_map(const SectionDisk& disk, const Vec2& w, const ReturnOptions& opt = {});

/// Cell centres of a grid x grid lattice on [-0.9, 0.9]^2 inside the open disk.
std::vector<Vec2> interior_grid(int grid);
std::vector<ReturnSample> return_grid(const SectionDisk& disk, const std::vector<Vec2>& points,
                                      const ReturnOptions& opt = {}, int jobs = 1);

/// Action of a linear symmetry on disk coordinates (the image must lie on the page).
Vec2 act(const SectionDisk& disk, const Mat4& R, const Vec2& w);

struct InvarianceResult {
    bool invariant = false;
    double distance = 0.0;           // sampled Hausdorff distance of R(D) and D
    double image_theta = 0.0;        // page angle of R(D)
    double distance_to_image = 0.0;  // Hausdorff distance of R(D) and the page image_theta
};

InvarianceResult invariance_check(const SectionDisk& disk, const Involution& inv, int samples = 400);

struct FixedPointResult {
    Vec2 point = Vec2::Zero();
    double displacement = 0.0;        // |psi(x) - x|
    double involution_residual = 0.0; // |R(x) - x|
    bool continuum = false;           // every point of the fixed arc is fixed
    ReturnSample sample;
};

/// Fixed point of the return map on the fixed arc of the involution in the disk.
FixedPointResult symmetric_fixed_point(const SectionDisk& disk, const Involution& inv,
                                       const ReturnOptions& opt = {}, int scan = 40);

/// max |psi(R(psi(w))) - R(w)| over the points.
double reversibility_defect(const SectionDisk& disk, const Involution& inv,
                            const std::vector<Vec2>& points, const ReturnOptions& opt = {});

/// max distance of the half-images to the opposite page.
double half_page_defect(const SectionDisk& disk, const std::vector<ReturnSample>& samples);

/// relative change of the d lambda area of the quadrilateral spanned at w by
/// steps h e1, h e2 under the return map.
double area_defect(const SectionDisk& disk, const Vec2& w, double h, const ReturnOptions& opt = {});

void write_return_csv(std::ostream& os, const std::vector<ReturnSample>& samples, double tau_tol);
void write_return_svg(std::ostream& os, const std::vector<ReturnSample>& samples);

}  // namespace symreeb
