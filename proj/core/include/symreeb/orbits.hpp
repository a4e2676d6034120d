#pragma once

#include "symreeb/flow.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symreeb {

enum class ChordFraction { half, quarter };
std::string to_string(ChordFraction f);
ChordFraction chord_fraction_from_string(const std::string& s);

/// Boundary value problem c(0) in Fix(start), c(tau) in Fix(end) on H = energy.
struct ChordSpec {
    std::string start_involution = "rho";
    std::string end_involution = "rho";
    double energy = 1.0;
    Vec4 seed = Vec4::Zero();
    /// 0 selects the first approach of the seed's trajectory to Fix(end)
    double time_guess = 0.0;
    ChordFraction fraction = ChordFraction::half;
};

/// Throws ValidationError unless the seed is on the level (1e-10) and on Fix(start) (1e-12).
void validate_chord_spec(const SystemModel& model, const ChordSpec& spec);

struct ShootingOptions {
    int max_iterations = 50;
    /// Newton stops once |residual| is below this
    double tolerance = 1e-11;
    /// accepted chords end on Fix(end) within this
    double endpoint_tolerance = 1e-9;
    /// time window scanned for the first approach to Fix(end)
    double horizon = 20.0;
    /// intervals per chord segment of the assembled orbit (even); 0 = automatic
    int samples_per_chord = 0;
    IntegrateOptions integration{};
};

enum class SymmetryType { symmetric, doubly_symmetric, type_I, type_II, nonsymmetric };
std::string to_string(SymmetryType t);
SymmetryType symmetry_type_from_string(const std::string& s);

/// A symmetry found on an orbit: R x(t) = x(shift - t) for anti-symplectic R,
/// R x(t) = x(t + shift) for symplectic R.
struct SymmetryMatch {
    std::string label;
    bool anti_symplectic = true;
    double shift = 0.0;
    double residual = 0.0;
};

struct OrbitRecord {
    Trajectory trajectory;
    double period = 0.0;
    double energy = 0.0;
    std::vector<SymmetryMatch> symmetry;
    SymmetryType sym_type = SymmetryType::nonsymmetric;
    /// Kang's type ("I"/"II") where the L1/L2 split is defined
    std::optional<std::string> kang_type;
    double closure_residual = 0.0;
    std::optional<MonodromyPath> monodromy;
    /// keyed by frame choice: "global", "symmetric:<label>"
    std::map<std::string, IndexReport> indices;
    std::map<std::string, std::string> index_errors;
    int covering_number = 1;

    // chord provenance
    std::string start_involution, end_involution;
    ChordFraction fraction = ChordFraction::half;
    double chord_time = 0.0;
    int chord_copies = 0;          // number of chord segments making up one period
    double endpoint_residual = 0.0;
    double assembly_residual = 0.0;  // assembled vs directly integrated trajectory
    int newton_iterations = 0;
    std::string chart = "physical";
    double min_collision_distance = 0.0;
    bool near_collision = false;

    bool has_symmetry(const std::string& label) const;
};

/// Points of Fix(label) on H = c, found by scanning the first fixed-plane
/// coordinate over [-extent, extent] and bracketing roots of the second in
/// [-4 extent, 4 extent].
std::vector<Vec4> fixed_curve_seeds(const SystemModel& model, const std::string& label, double c,
                                    int count = 64, double extent = 2.0);

/// Newton shooting for a chord followed by order-aware assembly of the closed orbit.
OrbitRecord shoot_chord(const SystemModel& model, const ChordSpec& spec,
                        const ShootingOptions& opt = {});

/// Multistart over seeds; failed seeds are skipped and orbits closer than
/// 1e-6 (sampled Hausdorff distance) are merged, keeping seed order.
struct SearchResult {
    std::vector<OrbitRecord> orbits;
    std::vector<std::string> failures;  // one message per failed seed
};
SearchResult orbit_search(const SystemModel& model, const ChordSpec& base,
                          const std::vector<Vec4>& seeds, const ShootingOptions& opt = {},
                          int jobs = 1);

/// Orbit through z0 with known period T (no shooting); symmetries are detected.
OrbitRecord orbit_from_initial_condition(const SystemModel& model, const Vec4& z0, double T,
                                         const IntegrateOptions& opt = {});

/// The k-fold cover: same initial point, period k T.
OrbitRecord cover(const OrbitRecord& orbit, int k);

/// Anti-symplectic and cyclic symmetries of the model checked on orbits.
std::vector<std::string> symmetry_candidates(const SystemModel& model);

/// Tests every candidate symmetry on the trace (tolerance 1e-6) and sets
/// symmetry, sym_type and covering_number.
void detect_symmetries(OrbitRecord& orbit, double tol = 1e-6);

/// Type I/II on PCR3BP-type models (and Kang type on Hill), using the split
/// of Fix(rho) by the sign of q1.
OrbitRecord classify_symmetry(const OrbitRecord& orbit, const SystemModel& model);

struct IndexOptions {
    SpectralOptions spectral{};
    bool symmetric_frames = true;
    FrameOptions frame{};
};

/// Fills orbit.indices for the global frame and for symmetric frames of
/// involutions fixing x(0). Failures are recorded in orbit.index_errors.
void compute_indices(OrbitRecord& orbit, const IndexOptions& opt = {});

struct LinkingResult {
    int value = 0;
    double raw = 0.0;
    double min_distance = 0.0;
};

/// Linking number of two closed polygons in R^3 (exact solid-angle sum).
double polygon_linking(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b);

/// Linking of two disjoint closed curves on S^3 after stereographic projection
/// from the pole farthest from both; points are normalized to S^3 first.
LinkingResult sphere_linking(const std::vector<Vec4>& a, const std::vector<Vec4>& b);

LinkingResult linking_number(const OrbitRecord& a, const OrbitRecord& b);

struct SelfLinkingResult {
    double value = 0.0;   // rational when cover > 1
    double raw = 0.0;     // Gauss value before rounding and division
    double scale = 0.0;   // push-off distance used
    int cover = 1;
};

/// Linking of the orbit with its push-off along e1 of the frame, divided by cover^2.
SelfLinkingResult self_linking(const OrbitRecord& orbit, const TrivializationFrame& frame,
                               int cover = 1);

enum class Verdict { yes, no, not_computed };
std::string to_string(Verdict v);

struct PredicateReport {
    Verdict simply_covered = Verdict::not_computed;
    Verdict self_linking_minus_one = Verdict::not_computed;
    Verdict cz_at_least_three = Verdict::not_computed;
    Verdict rs_at_least_three_halves = Verdict::not_computed;
    Verdict symmetric = Verdict::not_computed;
    Verdict doubly_symmetric = Verdict::not_computed;
    std::optional<int> mu_cz;
    std::optional<double> mu_rs;
    std::optional<double> sl;
    std::vector<std::string> notes;
    std::string caveat;
};

PredicateReport predicate_report(const OrbitRecord& orbit,
                                 const std::optional<SelfLinkingResult>& sl = std::nullopt);

}  // namespace symreeb
