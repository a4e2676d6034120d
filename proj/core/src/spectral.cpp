// Spectral route to the indices: the operator v -> -J0 v' - S v is discretized on a
// real trigonometric basis and diagonalized in an eigenvalue window around the
// windings of interest.
#include "symreeb/sympath.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace symreeb {

namespace {

using cplx = std::complex<double>;

struct Term {
    int freq;
    cplx coeff;
};

// Real basis function: component a of R^2 times a real trigonometric polynomial.
struct BasisFn {
    int a;
    Term terms[2];
    int nterms;
};

constexpr double kRootHalf = 0.70710678118654752440;

BasisFn constant_fn(int a) { return {a, {{0, 1.0}, {0, 0.0}}, 1}; }
BasisFn cos_fn(int a, int m) { return {a, {{m, kRootHalf}, {-m, kRootHalf}}, 2}; }
BasisFn sin_fn(int a, int m) {
    return {a, {{m, cplx(0, -kRootHalf)}, {-m, cplx(0, kRootHalf)}}, 2};
}

// Full circle: both components, all of 1, cos, sin. Chord problem: the subspace
// v(-t) = I v(t), i.e. first component even and second component odd.
std::vector<BasisFn> make_basis(int modes, bool chord) {
    std::vector<BasisFn> b;
    b.push_back(constant_fn(0));
    if (!chord) b.push_back(constant_fn(1));
    for (int m = 1; m <= modes; ++m) {
        b.push_back(cos_fn(0, m));
        b.push_back(sin_fn(1, m));
        if (!chord) {
            b.push_back(sin_fn(0, m));
            b.push_back(cos_fn(1, m));
        }
    }
    return b;
}

// Fourier data of S_k(t) = k S(kt).
struct Generator {
    const SymmetricLoop* S;
    int k;
    cplx coeff(int a, int b, int r) const {
        if (r % k != 0) return 0.0;
        return static_cast<double>(k) * S->coefficient(a, b, r / k);
    }
    Mat2 operator()(double t) const { return static_cast<double>(k) * (*S)(k * t); }
};

std::vector<double> assemble(const std::vector<BasisFn>& basis, const Generator& g) {
    const int n = static_cast<int>(basis.size());
    const double D[2][2] = {{0.0, 1.0}, {-1.0, 0.0}};  // -J0
    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const BasisFn& fi = basis[i];
        for (int j = i; j < n; ++j) {
            const BasisFn& fj = basis[j];
            cplx acc = 0.0;
            for (int u = 0; u < fi.nterms; ++u) {
                for (int v = 0; v < fj.nterms; ++v) {
                    const int p = fi.terms[u].freq, q = fj.terms[v].freq;
                    const cplx ab = fi.terms[u].coeff * fj.terms[v].coeff;
                    if (p + q == 0 && D[fi.a][fj.a] != 0.0)
                        acc += ab * D[fi.a][fj.a] * cplx(0.0, kTwoPi * q);
                    acc -= ab * g.coeff(fi.a, fj.a, -p - q);
                }
            }
            A[static_cast<std::size_t>(j) * n + i] = acc.real();
            A[static_cast<std::size_t>(i) * n + j] = acc.real();
        }
    }
    return A;
}

struct Window {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};

Window eigen_window(std::vector<double> A, int n, double vl, double vu) {
    Window w;
    lapack_int m = 0;
    std::vector<double> vals(n);
    std::vector<double> Z(static_cast<std::size_t>(n) * n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'U', n, A.data(), n, vl, vu,
                                           0, 0, 0.0, &m, vals.data(), Z.data(), n, support.data());
    if (info != 0) throw InternalError("dsyevr failed with info " + std::to_string(info));
    for (lapack_int i = 0; i < m; ++i) {
        w.values.push_back(vals[i]);
        w.vectors.emplace_back(Z.begin() + static_cast<std::ptrdiff_t>(i) * n,
                               Z.begin() + static_cast<std::ptrdiff_t>(i + 1) * n);
    }
    return w;
}

struct Mode {
    double eta;
    int winding;  // over the full circle
    std::vector<cplx> values;
    double residual;
};

// Evaluates the real eigenfunction on a uniform grid, then extracts its winding,
// refining the grid until every argument increment is below pi/2.
Mode analyse_mode(const std::vector<BasisFn>& basis, const std::vector<double>& z, double eta,
                  const Generator& g, int modes, bool with_residual) {
    // complex Fourier coefficients per component
    std::vector<cplx> c[2] = {std::vector<cplx>(2 * modes + 1, 0.0),
                              std::vector<cplx>(2 * modes + 1, 0.0)};
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (int u = 0; u < basis[i].nterms; ++u)
            c[basis[i].a][basis[i].terms[u].freq + modes] += z[i] * basis[i].terms[u].coeff;

    Mode mode{eta, 0, {}, 0.0};
    for (int G = 4 * modes + 8; G <= 256 * modes; G *= 2) {
        std::vector<cplx> vals(G), dvals(G);
        for (int s = 0; s < G; ++s) {
            const double t = static_cast<double>(s) / G;
            const cplx w = std::polar(1.0, kTwoPi * t);
            cplx e = std::pow(w, -modes);
            cplx v[2] = {0.0, 0.0}, dv[2] = {0.0, 0.0};
            for (int m = -modes; m <= modes; ++m) {
                for (int a = 0; a < 2; ++a) {
                    const cplx term = c[a][m + modes] * e;
                    v[a] += term;
                    dv[a] += term * cplx(0.0, kTwoPi * m);
                }
                e *= w;
            }
            vals[s] = cplx(v[0].real(), v[1].real());
            dvals[s] = cplx(dv[0].real(), dv[1].real());
        }
        double total = 0.0;
        bool fine = true;
        double vmax = 0.0, vmin = 1e300;
        for (int s = 0; s < G; ++s) {
            vmax = std::max(vmax, std::abs(vals[s]));
            vmin = std::min(vmin, std::abs(vals[s]));
            const double d = std::arg(vals[(s + 1) % G] / vals[s]);
            if (!std::isfinite(d) || std::abs(d) >= kPi / 2) {
                fine = false;
                break;
            }
            total += d;
        }
        if (!fine) continue;
        if (!(vmin > 1e-10 * vmax))
            throw RefineError("eigenfunction vanishes on the grid; increase modes");
        mode.winding = static_cast<int>(std::lround(total / kTwoPi));
        if (std::abs(total / kTwoPi - mode.winding) > 1e-6)
            throw InternalError("eigenfunction winding is not an integer");
        if (with_residual) {
            double num = 0.0, den = 0.0;
            for (int s = 0; s < G; ++s) {
                const double t = static_cast<double>(s) / G;
                const Mat2 S = g(t);
                const Vec2 v(vals[s].real(), vals[s].imag());
                const Vec2 dv(dvals[s].real(), dvals[s].imag());
                const Vec2 r = -J0() * dv - S * v - eta * v;
                num += r.squaredNorm();
                den += v.squaredNorm();
            }
            mode.residual = std::sqrt(num / den);
        }
        mode.values = std::move(vals);
        return mode;
    }
    throw RefineError("winding extraction did not resolve; increase modes");
}

struct Spectrum {
    std::vector<Mode> modes;
};

Spectrum solve(const SymmetricLoop& S, int k, bool chord, double vl, double vu,
               const SpectralOptions& opt, bool with_residual) {
    const Generator g{&S, k};
    const int M = opt.modes;
    // windings present in the window must stay far from the truncation edge
    const double reach = (std::max(std::abs(vl), std::abs(vu)) + k * S.sup_norm()) / kTwoPi + 2;
    if (reach > M / 4.0)
        throw RefineError("eigenvalue window needs windings up to " + std::to_string(reach) +
                          "; increase modes beyond " + std::to_string(M));
    const auto basis = make_basis(M, chord);
    const int n = static_cast<int>(basis.size());
    Window w = eigen_window(assemble(basis, g), n, vl, vu);
    Spectrum sp;
    for (std::size_t i = 0; i < w.values.size(); ++i)
        sp.modes.push_back(analyse_mode(basis, w.vectors[i], w.values[i], g, M, with_residual));

    // clusters must carry one winding
    for (std::size_t i = 0; i + 1 < sp.modes.size(); ++i) {
        if (sp.modes[i + 1].eta - sp.modes[i].eta < opt.cluster_tol &&
            sp.modes[i + 1].winding != sp.modes[i].winding)
            throw RefineError("eigenvalue cluster with inconsistent windings; increase modes");
    }
    return sp;
}

void check_modes(int modes) {
    if (modes < 16) throw ValidationError("spectral discretization needs at least 16 modes");
}

double endpoint_det(const SymmetricLoop& S, int k) {
    const SymplecticPath path = path_from_loop(S, k);
    return std::abs((path.endpoint() - Mat2::Identity()).determinant());
}

double chord_angle(const SymmetricLoop& S, int k) {
    const SymplecticPath path = path_from_loop(S, k);
    const Vec2 u = path.at(0.5 * k).col(0);
    double a = std::fmod(std::abs(std::atan2(u.y(), u.x())), kPi);
    return std::min(a, kPi - a);
}

}  // namespace

IndexReport cz_index_spectral(const SymmetricLoop& S, int k, const SpectralOptions& opt) {
    check_modes(opt.modes);
    if (k < 1) throw ValidationError("iterate count must be positive");
    const double det = endpoint_det(S, k);
    if (det < opt.degeneracy_tol)
        throw DegeneracyError("degenerate path: |det(Phi(k) - Id)| = " + std::to_string(det));

    const double L = kTwoPi + 2.0 * k * S.sup_norm() + 1.0;
    const Spectrum sp = solve(S, k, false, -L, L, opt, false);

    double gap = 1e300;
    int alpha = std::numeric_limits<int>::min();
    int upper = std::numeric_limits<int>::max();
    for (const auto& m : sp.modes) {
        gap = std::min(gap, std::abs(m.eta));
        if (m.eta < -opt.delta)
            alpha = std::max(alpha, m.winding);
        else
            upper = std::min(upper, m.winding);
    }
    if (gap < opt.gap_tol)
        throw IllConditionedError("spectral gap " + std::to_string(gap) +
                                  " around 0; refine the discretization");
    if (alpha == std::numeric_limits<int>::min() || upper == std::numeric_limits<int>::max())
        throw InternalError("eigenvalue window missed one side of zero");
    if (upper < alpha) throw InternalError("windings are not monotone in the eigenvalue");

    IndexReport r;
    r.method = IndexMethod::spectral;
    r.alpha = alpha;
    r.p = (upper == alpha) ? 0 : 1;
    r.mu_cz = 2 * alpha + *r.p;
    r.residuals["det_endpoint_minus_id"] = det;
    r.residuals["spectral_gap"] = gap;
    return r;
}

IndexReport rs_index_spectral(const SymmetricLoop& S, int k, const SpectralOptions& opt) {
    check_modes(opt.modes);
    if (!S.symmetric()) throw ValidationError("chord index needs a loop with S(-t) = I S(t) I");
    if (k < 1) throw ValidationError("iterate count must be positive");
    const double angle = chord_angle(S, k);
    if (angle < opt.degeneracy_tol)
        throw DegeneracyError("degenerate chord: angle between Phi(k/2)R and R is " +
                              std::to_string(angle));

    const double L = kTwoPi + 2.0 * k * S.sup_norm() + 1.0;
    const Spectrum sp = solve(S, k, true, -L, L, opt, false);
    double gap = 1e300;
    int alpha2 = std::numeric_limits<int>::min();
    for (const auto& m : sp.modes) {
        gap = std::min(gap, std::abs(m.eta));
        if (m.eta < -opt.delta) alpha2 = std::max(alpha2, m.winding);
    }
    if (gap < opt.gap_tol)
        throw IllConditionedError("spectral gap " + std::to_string(gap) +
                                  " around 0; refine the discretization");
    if (alpha2 == std::numeric_limits<int>::min())
        throw InternalError("eigenvalue window has no negative eigenvalue");

    IndexReport r;
    r.method = IndexMethod::spectral;
    r.alpha = 0.5 * alpha2;
    r.mu_rs = alpha2 + 0.5;
    r.residuals["chord_angle"] = angle;
    r.residuals["spectral_gap"] = gap;
    return r;
}

namespace {

std::vector<EigenModeRecord> spectrum_records(const SymmetricLoop& S, int k, int wmin, int wmax,
                                              const SpectralOptions& opt, bool chord) {
    if (opt.modes < 128) throw ValidationError("winding spectra need at least 128 modes");
    const int bound = std::max(std::abs(wmin), std::abs(wmax));
    if (bound > opt.modes / 8 || wmin > wmax)
        throw ValidationError("winding range must lie within +-modes/8");
    if (chord && !S.symmetric()) throw ValidationError("chord spectrum needs a symmetric loop");

    const double norm = k * S.sup_norm();
    // the eigenvalue of (full-circle) winding w lies within |S_k| of 2 pi w
    const double vl = kTwoPi * wmin - norm - 1.0;
    const double vu = kTwoPi * wmax + norm + 1.0;
    Spectrum sp = solve(S, k, chord, vl, vu, opt, true);

    std::vector<EigenModeRecord> out;
    for (auto& m : sp.modes) {
        if (m.winding < wmin || m.winding > wmax) continue;
        EigenModeRecord rec;
        rec.eta = m.eta;
        rec.winding = chord ? 0.5 * m.winding : m.winding;
        rec.eigenfunction = std::move(m.values);
        rec.residual = m.residual;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

std::vector<EigenModeRecord> winding_spectrum(const SymmetricLoop& S, int k, int wmin, int wmax,
                                              const SpectralOptions& opt) {
    auto recs = spectrum_records(S, k, wmin, wmax, opt, false);
    for (int w = wmin; w <= wmax; ++w) {
        const auto c = std::count_if(recs.begin(), recs.end(),
                                     [w](const EigenModeRecord& r) { return r.winding == w; });
        if (c != 2)
            throw InternalError("winding " + std::to_string(w) + " carries " + std::to_string(c) +
                                " eigenvalues instead of two");
    }
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        if (recs[i + 1].winding < recs[i].winding)
            throw InternalError("winding is not monotone in the eigenvalue");
    return recs;
}

std::vector<EigenModeRecord> chord_winding_spectrum(const SymmetricLoop& S, int k, int wmin,
                                                    int wmax, const SpectralOptions& opt) {
    auto recs = spectrum_records(S, k, wmin, wmax, opt, true);
    for (int w = wmin; w <= wmax; ++w) {
        const auto c = std::count_if(recs.begin(), recs.end(), [w](const EigenModeRecord& r) {
            return std::lround(2 * r.winding) == w;
        });
        if (c != 1)
            throw InternalError("relative winding " + std::to_string(0.5 * w) + " carries " +
                                std::to_string(c) + " eigenvalues instead of one");
    }
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        if (recs[i + 1].winding < recs[i].winding)
            throw InternalError("relative winding is not monotone in the eigenvalue");
    return recs;
}

}  // namespace symreeb
