#pragma once

#include "symreeb/common.hpp"

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symreeb {

/// Loop of symmetric 2x2 matrices on the circle R/Z, stored as uniform samples
/// t_j = j/n and evaluated in between by trigonometric interpolation.
class SymmetricLoop {
public:
    SymmetricLoop() = default;

    /// Uniform samples on [0,1). A trailing sample at t = 1 is accepted and dropped.
    SymmetricLoop(std::vector<Mat2> samples, bool symmetric_flag);

    static SymmetricLoop from_function(const std::function<Mat2(double)>& f, int n,
                                       bool symmetric_flag);
    static SymmetricLoop constant(const Mat2& s, int n = 64);

    Mat2 operator()(double t) const;
    int size() const { return static_cast<int>(samples_.size()); }
    const std::vector<Mat2>& samples() const { return samples_; }
    double time(int j) const { return static_cast<double>(j) / size(); }
    bool symmetric() const { return symmetric_; }

    /// Fourier coefficient of entry (a,b) at integer frequency m, |m| <= size()/2.
    std::complex<double> coefficient(int a, int b, int m) const;
    int bandwidth() const { return size() / 2; }

    /// max_t |S(-t) - I S(t) I| over the samples.
    double symmetry_defect() const;
    /// max_t of the spectral norm of S(t) over the samples.
    double sup_norm() const;

private:
    std::vector<Mat2> samples_;
    // coeff_[e][m + K], entries e = 0:(0,0) 1:(0,1) 2:(1,1)
    std::vector<std::complex<double>> coeff_[3];
    bool symmetric_ = false;
};

struct PathSample {
    double t;
    Mat2 M;
};

class SymplecticPath {
public:
    SymplecticPath() = default;
    SymplecticPath(std::vector<PathSample> samples, int k,
                   std::optional<SymmetricLoop> generator = std::nullopt);

    const std::vector<PathSample>& samples() const { return samples_; }
    int iterate_count() const { return k_; }
    const std::optional<SymmetricLoop>& generator() const { return generator_; }
    const Mat2& endpoint() const { return samples_.back().M; }
    /// Sample whose time equals t to within 1e-12; throws if there is none.
    const Mat2& at(double t) const;
    std::size_t index_of(double t) const;

private:
    std::vector<PathSample> samples_;
    int k_ = 1;
    std::optional<SymmetricLoop> generator_;
};

enum class IndexMethod { spectral, rotation, crossing };
std::string to_string(IndexMethod m);

struct IndexReport {
    std::optional<int> mu_cz;
    std::optional<double> mu_rs;  // lies in Z + 1/2
    double alpha = 0.0;           // integer (periodic) or half-integer (boundary)
    std::optional<int> p;
    IndexMethod method = IndexMethod::spectral;
    std::optional<double> rotation_number;
    std::map<std::string, double> residuals;
};

struct EigenModeRecord {
    double eta = 0.0;
    double winding = 0.0;  // integer for the loop problem, half-integer for the chord problem
    std::vector<std::complex<double>> eigenfunction;  // v(t_j) as x + i y on a uniform grid
    double residual = 0.0;
};

struct SpectralOptions {
    int modes = 256;
    double delta = 1e-9;           // eigenvalues < -delta count as negative
    double cluster_tol = 1e-9;     // multiplicity clustering
    double degeneracy_tol = 1e-8;  // |det(Phi(k) - Id)| and chord angle
    double gap_tol = 1e-8;         // smallest |eta| allowed
};

/// Solves dPhi/dt = J0 S Phi, Phi(0) = Id on [0,1] and extends by Phi(t+1) = Phi(t) Phi(1).
/// The result has samples_per_unit samples per unit time (default: S.size()).
SymplecticPath path_from_loop(const SymmetricLoop& S, int k, int samples_per_unit = 0);

IndexReport cz_index_spectral(const SymmetricLoop& S, int k, const SpectralOptions& opt = {});
IndexReport cz_index_rotation(const SymplecticPath& path);
IndexReport rs_index_spectral(const SymmetricLoop& S, int k = 1, const SpectralOptions& opt = {});
IndexReport rs_index_crossing(const SymplecticPath& path);

/// Eigenpairs of v -> -J0 v' - S_k v on the circle with winding in [wmin, wmax],
/// where S_k(t) = k S(kt) is the k-fold generator.
std::vector<EigenModeRecord> winding_spectrum(const SymmetricLoop& S, int k, int wmin, int wmax,
                                              const SpectralOptions& opt = {});

/// Same operator on [0, 1/2] with v(0), v(1/2) real; windings are relative (in Z/2).
/// Records with relative winding in [wmin/2, wmax/2] are returned.
std::vector<EigenModeRecord> chord_winding_spectrum(const SymmetricLoop& S, int k, int wmin,
                                                    int wmax, const SpectralOptions& opt = {});

double retrivialized_rs(double mu_rs, int wind_change);

/// Rotation number (in turns) of the path over its whole range [0, k].
double rotation_number(const SymplecticPath& path);

}  // namespace symreeb
