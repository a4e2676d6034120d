// Independent reference computations used by the tests. Nothing here calls into
// the library's numerical routines.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;

constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

struct Mode {
    double eta;
    int winding;
};

// Constant S: on the Fourier mode e^{2 pi i m t} c the operator -J0 d/dt - kS
// acts as the Hermitian matrix -2 pi i m J0 - kS. A real eigenfunction
// Re(e^{2 pi i m t} c) winds m times counterclockwise when Im(conj(c1) c2) < 0.
// Modes m and -m give the same real eigenfunctions, so each m > 0 eigenvalue
// is listed twice.
inline std::vector<Mode> constant_loop_spectrum(const Mat2& S, int k, int mmax) {
    using C = std::complex<double>;
    std::vector<Mode> out;
    Eigen::SelfAdjointEigenSolver<Mat2> es0(-k * S);
    for (int i = 0; i < 2; ++i) out.push_back({es0.eigenvalues()(i), 0});
    for (int m = 1; m <= mmax; ++m) {
        Eigen::Matrix2cd H;
        H << C(-k * S(0, 0), 0), C(-k * S(0, 1), two_pi * m),
            C(-k * S(1, 0), -two_pi * m), C(-k * S(1, 1), 0);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
        for (int i = 0; i < 2; ++i) {
            const Eigen::Vector2cd c = es.eigenvectors().col(i);
            const double orient = (std::conj(c(0)) * c(1)).imag();
            const int w = orient < 0 ? m : -m;
            out.push_back({es.eigenvalues()(i), w});
            out.push_back({es.eigenvalues()(i), w});
        }
    }
    std::sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) { return a.eta < b.eta; });
    return out;
}

// Constant diagonal S = diag(a, d) on the chord problem. The mode
// (alpha cos 2 pi m t, beta sin 2 pi m t) reduces the operator to
// [[-ka, 2 pi m], [2 pi m, -kd]]; its even extension winds sign(alpha beta) m
// times around the full circle. Windings are returned as full windings.
inline std::vector<Mode> constant_chord_spectrum(double a, double d, int k, int mmax) {
    std::vector<Mode> out{{-k * a, 0}};
    for (int m = 1; m <= mmax; ++m) {
        Mat2 H;
        H << -k * a, two_pi * m, two_pi * m, -k * d;
        Eigen::SelfAdjointEigenSolver<Mat2> es(H);
        for (int i = 0; i < 2; ++i) {
            const Eigen::Vector2d v = es.eigenvectors().col(i);
            out.push_back({es.eigenvalues()(i), v(0) * v(1) > 0 ? m : -m});
        }
    }
    std::sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) { return a.eta < b.eta; });
    return out;
}

// mu_CZ = 2 alpha + p read off a sorted spectrum.
inline int cz_from_spectrum(const std::vector<Mode>& spec) {
    int alpha = -1000000, upper = 1000000;
    for (const auto& m : spec) {
        if (m.eta < 0) alpha = std::max(alpha, m.winding);
        else upper = std::min(upper, m.winding);
    }
    return 2 * alpha + (upper == alpha ? 0 : 1);
}

// mu_RS = 2 alpha(D) + 1/2 with alpha(D) the largest negative relative winding.
inline double rs_from_chord_spectrum(const std::vector<Mode>& spec) {
    int alpha2 = -1000000;
    for (const auto& m : spec)
        if (m.eta < 0) alpha2 = std::max(alpha2, m.winding);
    return alpha2 + 0.5;
}

// Classical fixed-step RK4 for Phi' = J0 S(t) Phi on [0, T].
inline Mat2 rk4_path(const std::function<Mat2(double)>& S, double T, int steps) {
    Mat2 J;
    J << 0, -1, 1, 0;
    Mat2 P = Mat2::Identity();
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const Mat2 k1 = J * S(t) * P;
        const Mat2 k2 = J * S(t + h / 2) * (P + h / 2 * k1);
        const Mat2 k3 = J * S(t + h / 2) * (P + h / 2 * k2);
        const Mat2 k4 = J * S(t + h) * (P + h * k3);
        P += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return P;
}

// Random smooth loop of symmetric matrices. With symmetric = true the diagonal
// is even and the off-diagonal odd in t, so S(-t) = I S(t) I.
struct RandomLoop {
    std::vector<double> c00, c11, s00, s11, c01, s01;
    bool symmetric;
    Mat2 operator()(double t) const {
        Mat2 S = Mat2::Zero();
        for (std::size_t m = 0; m < c00.size(); ++m) {
            const double c = std::cos(two_pi * m * t), s = std::sin(two_pi * m * t);
            S(0, 0) += c00[m] * c + s00[m] * s;
            S(1, 1) += c11[m] * c + s11[m] * s;
            S(0, 1) += c01[m] * c + s01[m] * s;
        }
        S(1, 0) = S(0, 1);
        return S;
    }
};

inline RandomLoop random_loop(std::mt19937_64& rng, bool symmetric, int harmonics = 3,
                              double scale = 6.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    RandomLoop L;
    L.symmetric = symmetric;
    for (int m = 0; m <= harmonics; ++m) {
        const double damp = scale / (1.0 + m);
        L.c00.push_back(damp * n(rng));
        L.c11.push_back(damp * n(rng));
        L.s00.push_back(symmetric || m == 0 ? 0.0 : damp * n(rng));
        L.s11.push_back(symmetric || m == 0 ? 0.0 : damp * n(rng));
        L.c01.push_back(symmetric ? 0.0 : damp * n(rng));
        L.s01.push_back(m == 0 ? 0.0 : damp * n(rng));
    }
    return L;
}

// Midpoint-rule Gauss double integral of two closed polygons in R^3.
inline double gauss_linking(const std::vector<Eigen::Vector3d>& a,
                            const std::vector<Eigen::Vector3d>& b) {
    double acc = 0.0;
    const std::size_t n = a.size(), m = b.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d da = a[(i + 1) % n] - a[i];
        const Eigen::Vector3d pa = 0.5 * (a[(i + 1) % n] + a[i]);
        for (std::size_t j = 0; j < m; ++j) {
            const Eigen::Vector3d db = b[(j + 1) % m] - b[j];
            const Eigen::Vector3d pb = 0.5 * (b[(j + 1) % m] + b[j]);
            const Eigen::Vector3d r = pa - pb;
            acc += r.dot(da.cross(db)) / std::pow(r.norm(), 3);
        }
    }
    return acc / (4.0 * pi);
}

// Ellipsoid |z1|^2/r1^2 + |z2|^2/r2^2 with X_H = J grad H: z_j(t) = e^{2it/rj^2} z_j(0).
inline Vec4 ellipsoid_flow(const Vec4& z, double r1sq, double r2sq, double t) {
    const double a = 2.0 * t / r1sq, b = 2.0 * t / r2sq;
    return Vec4(std::cos(a) * z(0) - std::sin(a) * z(1), std::sin(a) * z(0) + std::cos(a) * z(1),
                std::cos(b) * z(2) - std::sin(b) * z(3), std::sin(b) * z(2) + std::cos(b) * z(3));
}

}  // namespace oracle
