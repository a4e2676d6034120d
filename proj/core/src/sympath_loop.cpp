#include "symreeb/sympath.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

namespace symreeb {

namespace {

Mat2 mirror(const Mat2& s) {
    Mat2 r = s;
    r(0, 1) = -r(0, 1);
    r(1, 0) = -r(1, 0);
    return r;
}

}  // namespace

SymmetricLoop::SymmetricLoop(std::vector<Mat2> samples, bool symmetric_flag)
    : samples_(std::move(samples)), symmetric_(symmetric_flag) {
    if (samples_.size() >= 2 && (samples_.front() - samples_.back()).norm() < 1e-14 &&
        samples_.size() % 2 == 1)
        samples_.pop_back();
    if (samples_.size() < 8) throw ValidationError("symmetric loop needs at least 8 samples");
    for (const auto& s : samples_) {
        if (!s.allFinite()) throw ValidationError("symmetric loop sample is not finite");
        if (std::abs(s(0, 1) - s(1, 0)) > 1e-12)
            throw ValidationError("loop sample is not a symmetric matrix");
    }
    for (auto& s : samples_) {
        const double off = 0.5 * (s(0, 1) + s(1, 0));
        s(0, 1) = s(1, 0) = off;
    }

    const int n = size();
    const int K = n / 2;
    const std::array<std::pair<int, int>, 3> entries{{{0, 0}, {0, 1}, {1, 1}}};
    std::vector<std::complex<double>> twiddle(n);
    for (int j = 0; j < n; ++j)
        twiddle[j] = std::polar(1.0, -kTwoPi * static_cast<double>(j) / n);
    for (int e = 0; e < 3; ++e) {
        coeff_[e].assign(2 * K + 1, 0.0);
        for (int m = -K; m <= K; ++m) {
            std::complex<double> acc = 0.0;
            const long mm = ((m % n) + n) % n;
            for (int j = 0; j < n; ++j)
                acc += samples_[j](entries[e].first, entries[e].second) * twiddle[(mm * j) % n];
            acc /= static_cast<double>(n);
            if (n % 2 == 0 && std::abs(m) == K) acc *= 0.5;
            coeff_[e][m + K] = acc;
        }
    }

    if (symmetric_ && symmetry_defect() > 1e-9)
        throw ValidationError("loop flagged symmetric violates S(-t) = I S(t) I (defect " +
                              std::to_string(symmetry_defect()) + ")");
}

SymmetricLoop SymmetricLoop::from_function(const std::function<Mat2(double)>& f, int n,
                                           bool symmetric_flag) {
    std::vector<Mat2> s(n);
    for (int j = 0; j < n; ++j) s[j] = f(static_cast<double>(j) / n);
    return SymmetricLoop(std::move(s), symmetric_flag);
}

SymmetricLoop SymmetricLoop::constant(const Mat2& s, int n) {
    const bool sym = std::abs(s(0, 1)) < 1e-15;
    return SymmetricLoop(std::vector<Mat2>(n, s), sym);
}

std::complex<double> SymmetricLoop::coefficient(int a, int b, int m) const {
    const int K = bandwidth();
    if (std::abs(m) > K) return 0.0;
    const int e = (a == 0 && b == 0) ? 0 : (a == 1 && b == 1) ? 2 : 1;
    return coeff_[e][m + K];
}

Mat2 SymmetricLoop::operator()(double t) const {
    const int K = bandwidth();
    double v[3] = {0, 0, 0};
    const std::complex<double> w(std::cos(kTwoPi * t), std::sin(kTwoPi * t));
    std::complex<double> z = std::pow(w, -K);
    for (int m = -K; m <= K; ++m) {
        for (int e = 0; e < 3; ++e) v[e] += (coeff_[e][m + K] * z).real();
        z *= w;
    }
    Mat2 s;
    s << v[0], v[1], v[1], v[2];
    return s;
}

double SymmetricLoop::symmetry_defect() const {
    const int n = size();
    double d = 0.0;
    for (int j = 0; j < n; ++j) d = std::max(d, (samples_[(n - j) % n] - mirror(samples_[j])).norm());
    return d;
}

double SymmetricLoop::sup_norm() const {
    double r = 0.0;
    for (const auto& s : samples_) {
        Eigen::SelfAdjointEigenSolver<Mat2> es(s, Eigen::EigenvaluesOnly);
        r = std::max(r, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return r;
}

SymplecticPath::SymplecticPath(std::vector<PathSample> samples, int k,
                               std::optional<SymmetricLoop> generator)
    : samples_(std::move(samples)), k_(k), generator_(std::move(generator)) {
    if (k_ < 1) throw ValidationError("iterate count must be positive");
    if (samples_.size() < 2) throw ValidationError("symplectic path needs at least two samples");
    if (samples_.front().t != 0.0 || (samples_.front().M - Mat2::Identity()).norm() > 1e-14)
        throw ValidationError("symplectic path must start at the identity at t = 0");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (i > 0 && !(samples_[i].t > samples_[i - 1].t))
            throw ValidationError("path sample times must increase");
        const double scale = std::max(1.0, samples_[i].M.squaredNorm());
        if (std::abs(samples_[i].M.determinant() - 1.0) > 1e-9 * scale)
            throw ValidationError("path sample is not symplectic (det != 1)");
    }
    if (std::abs(samples_.back().t - k_) > 1e-12)
        throw ValidationError("path must end at t = k");
}

std::size_t SymplecticPath::index_of(double t) const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t - 1e-12,
                               [](const PathSample& s, double v) { return s.t < v; });
    if (it == samples_.end() || std::abs(it->t - t) > 1e-12)
        throw ValidationError("path has no sample at t = " + std::to_string(t));
    return static_cast<std::size_t>(it - samples_.begin());
}

const Mat2& SymplecticPath::at(double t) const { return samples_[index_of(t)].M; }

std::string to_string(IndexMethod m) {
    switch (m) {
        case IndexMethod::spectral: return "spectral";
        case IndexMethod::rotation: return "rotation";
        case IndexMethod::crossing: return "crossing";
    }
    return "unknown";
}

SymplecticPath path_from_loop(const SymmetricLoop& S, int k, int samples_per_unit) {
    if (k < 1) throw ValidationError("iterate count must be positive");
    if (S.size() < 64) throw ValidationError("loop must be sampled on at least 64 points");
    int n = samples_per_unit > 0 ? samples_per_unit : S.size();
    if (n % 2) ++n;

    using State = std::array<double, 4>;
    auto rhs = [&S](const State& x, State& dx, double t) {
        const Mat2 A = J0() * S(t);
        dx[0] = A(0, 0) * x[0] + A(0, 1) * x[2];
        dx[1] = A(0, 0) * x[1] + A(0, 1) * x[3];
        dx[2] = A(1, 0) * x[0] + A(1, 1) * x[2];
        dx[3] = A(1, 0) * x[1] + A(1, 1) * x[3];
    };
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());

    std::vector<double> times(n + 1);
    for (int j = 0; j <= n; ++j) times[j] = static_cast<double>(j) / n;
    std::vector<Mat2> unit(n + 1);
    State x{1, 0, 0, 1};
    ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1.0 / (4.0 * n),
                         [&](const State& s, double t) {
                             const int j = static_cast<int>(std::lround(t * n));
                             unit[j] << s[0], s[1], s[2], s[3];
                         });
    unit[0] = Mat2::Identity();
    double drift = 0.0;
    for (const auto& m : unit)
        drift = std::max(drift, std::abs(m.determinant() - 1.0) / std::max(1.0, m.squaredNorm()));
    if (drift > 1e-6)
        throw RefineError("determinant drift " + std::to_string(drift) +
                          " while integrating the loop; sample S more finely");
    // restore det = 1 exactly to the sample tolerance
    for (std::size_t j = 1; j < unit.size(); ++j) unit[j] /= std::sqrt(unit[j].determinant());

    std::vector<PathSample> out;
    out.reserve(static_cast<std::size_t>(k) * n + 1);
    Mat2 base = Mat2::Identity();
    for (int p = 0; p < k; ++p) {
        for (int j = (p == 0 ? 0 : 1); j <= n; ++j)
            out.push_back({p + static_cast<double>(j) / n, unit[j] * base});
        base = unit[n] * base;
        base /= std::sqrt(base.determinant());
    }
    out.front().M = Mat2::Identity();
    out.back().t = k;
    return SymplecticPath(std::move(out), k, S);
}

double retrivialized_rs(double mu_rs, int wind_change) { return mu_rs + wind_change; }

}  // namespace symreeb
