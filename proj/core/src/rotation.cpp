#include "symreeb/sympath.hpp"

#include <cmath>

namespace symreeb {

namespace {

// Continuous change of arg(Phi(t) v) along the samples with index <= last.
double arg_change(const SymplecticPath& path, const Vec2& v, std::size_t last) {
    const auto& s = path.samples();
    double total = 0.0;
    Vec2 prev = v;
    for (std::size_t i = 1; i <= last; ++i) {
        const Vec2 cur = s[i].M * v;
        const double d = std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        if (std::abs(d) >= kPi / 2)
            throw RefineError("argument jumps by more than pi/2 between path samples");
        total += d;
        prev = cur;
    }
    return total;
}

enum class EndpointKind { elliptic, hyperbolic };

struct Endpoint {
    EndpointKind kind;
    std::complex<double> lambda;
    Eigen::Vector2cd vec;
};

Endpoint classify(const Mat2& M) {
    constexpr double margin = 1e-8;
    const double tr = M.trace();
    const double disc = tr * tr - 4.0;
    Endpoint e;
    if (disc < 0) {
        e.kind = EndpointKind::elliptic;
        e.lambda = {0.5 * tr, 0.5 * std::sqrt(-disc)};
    } else {
        e.kind = EndpointKind::hyperbolic;
        e.lambda = 0.5 * (tr + (tr >= 0 ? 1.0 : -1.0) * std::sqrt(disc));
    }
    if (std::min(std::abs(e.lambda - 1.0), std::abs(e.lambda + 1.0)) < margin)
        throw DegeneracyError("parabolic endpoint: eigenvalue within 1e-8 of +-1");
    Eigen::Vector2cd u(M(0, 1), e.lambda - M(0, 0));
    Eigen::Vector2cd w(e.lambda - M(1, 1), M(1, 0));
    e.vec = u.norm() >= w.norm() ? u : w;
    e.vec /= e.vec.norm();
    return e;
}

double rotation_of(const SymplecticPath& path, const Endpoint& e) {
    const std::size_t last = path.samples().size() - 1;
    if (e.kind == EndpointKind::hyperbolic) {
        const double turns = arg_change(path, e.vec.real(), last) / kTwoPi;
        const double r = std::round(2.0 * turns) / 2.0;
        if (std::abs(r - turns) > 1e-6)
            throw RefineError("hyperbolic eigendirection does not return to its line");
        return r;
    }
    // average of the argument change against the invariant measure of the endpoint
    const Vec2 a = e.vec.real(), b = e.vec.imag();
    auto average = [&](int q) {
        double acc = 0.0;
        for (int j = 0; j < q; ++j) {
            const double phi = kTwoPi * j / q;
            acc += arg_change(path, std::cos(phi) * a + std::sin(phi) * b, last);
        }
        return acc / q / kTwoPi;
    };
    double prev = average(32);
    for (int q = 64; q <= 4096; q *= 2) {
        const double cur = average(q);
        if (std::abs(cur - prev) < 1e-11) return cur;
        prev = cur;
    }
    throw RefineError("rotation number quadrature did not converge");
}

}  // namespace

double rotation_number(const SymplecticPath& path) {
    return rotation_of(path, classify(path.endpoint()));
}

IndexReport cz_index_rotation(const SymplecticPath& path) {
    const Mat2& M = path.endpoint();
    const double det = std::abs((M - Mat2::Identity()).determinant());
    if (det < 1e-8)
        throw DegeneracyError("degenerate path: |det(Phi(k) - Id)| = " + std::to_string(det));
    const Endpoint e = classify(M);
    const double rho = rotation_of(path, e);

    IndexReport r;
    r.method = IndexMethod::rotation;
    r.rotation_number = rho;
    if (e.kind == EndpointKind::elliptic) {
        r.mu_cz = 2 * static_cast<int>(std::floor(rho)) + 1;
        r.residuals["elliptic"] = 1.0;
        r.residuals["distance_to_integer_rotation"] = std::abs(rho - std::round(rho));
    } else {
        r.mu_cz = static_cast<int>(std::lround(2.0 * rho));
        r.residuals["elliptic"] = 0.0;
    }
    r.alpha = std::floor(*r.mu_cz / 2.0);
    r.p = *r.mu_cz - 2 * static_cast<int>(r.alpha);
    r.residuals["det_endpoint_minus_id"] = det;
    return r;
}

IndexReport rs_index_crossing(const SymplecticPath& path) {
    const double half = 0.5 * path.iterate_count();
    const std::size_t ih = path.index_of(half);
    const auto& s = path.samples();
    const auto& gen = path.generator();
    auto generator_00 = [&](double t) { return (*gen)(t - std::floor(t))(0, 0); };

    // continuous angle of the line Phi(t) R
    std::vector<double> theta(ih + 1, 0.0);
    for (std::size_t i = 1; i <= ih; ++i) {
        const Vec2 p = s[i - 1].M.col(0), c = s[i].M.col(0);
        const double d = std::atan2(p.x() * c.y() - p.y() * c.x(), p.dot(c));
        if (std::abs(d) >= kPi / 2)
            throw RefineError("line path turns by more than pi/2 between samples");
        theta[i] = theta[i - 1] + d;
    }
    const double end = theta[ih];
    const double end_gap = std::abs(end / kPi - std::round(end / kPi)) * kPi;
    if (end_gap < 1e-8)
        throw DegeneracyError("degenerate chord: Phi(k/2)R meets R (angle " +
                              std::to_string(end_gap) + ")");

    double form0 = gen ? generator_00(0.0) : (theta[1] - theta[0]) / (s[1].t - s[0].t);
    if (std::abs(form0) < 1e-10) throw DegeneracyError("singular crossing form at t = 0");
    const int sign0 = form0 > 0 ? 1 : -1;

    int level = sign0 > 0 ? 0 : -1;  // floor(theta / pi) just after t = 0
    int interior = 0;
    int crossings = 0;
    double weakest = 1e300;
    for (std::size_t i = 1; i <= ih; ++i) {
        const int next = static_cast<int>(std::floor(theta[i] / kPi));
        if (next == level) continue;
        const int dir = next > level ? 1 : -1;
        for (int m = level; m != next; m += dir) {
            const double target = (dir > 0 ? m + 1 : m) * kPi;
            const double f = (target - theta[i - 1]) / (theta[i] - theta[i - 1]);
            const double tc = s[i - 1].t + f * (s[i].t - s[i - 1].t);
            int sign = dir;
            if (gen) {
                const double form = generator_00(tc);
                weakest = std::min(weakest, std::abs(form));
                if (std::abs(form) < 1e-10)
                    throw RefineError("crossing form is singular at t = " + std::to_string(tc));
                sign = form > 0 ? 1 : -1;
                if (sign != dir)
                    throw RefineError("crossing direction disagrees with its crossing form; "
                                      "refine the path sampling");
            }
            interior += sign;
            ++crossings;
        }
        level = next;
    }

    IndexReport r;
    r.method = IndexMethod::crossing;
    r.mu_rs = 0.5 * sign0 + interior;
    r.alpha = 0.5 * (*r.mu_rs - 0.5);
    r.rotation_number = end / kTwoPi;
    r.residuals["chord_angle"] = end_gap;
    r.residuals["crossings"] = crossings;
    if (crossings > 0) r.residuals["weakest_crossing_form"] = weakest;
    return r;
}

}  // namespace symreeb
