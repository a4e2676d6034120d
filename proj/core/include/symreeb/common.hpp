#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace symreeb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix4d;

// Phase space is ordered (x1, y1, x2, y2) with z_j = x_j + i y_j.
// J0 is multiplication by i on C; J4 = diag(J0, J0).
inline Mat2 J0() {
    Mat2 j;
    j << 0, -1, 1, 0;
    return j;
}

inline Mat4 J4() {
    Mat4 j = Mat4::Zero();
    j.block<2, 2>(0, 0) = J0();
    j.block<2, 2>(2, 2) = J0();
    return j;
}

// omega0(u, v) = <J4 u, v>
inline double omega0(const Vec4& u, const Vec4& v) { return (J4() * u).dot(v); }

// lambda0_x(v) = omega0(x, v) / 2
inline double lambda0(const Vec4& x, const Vec4& v) { return 0.5 * omega0(x, v); }

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
    // 2 = bad input, 3 = numerical failure
    virtual int exit_code() const noexcept { return 3; }
};

#define SYMREEB_ERROR(Name, Kind, Code)                                    \
    class Name : public Error {                                            \
    public:                                                                \
        using Error::Error;                                                \
        const char* kind() const noexcept override { return Kind; }        \
        int exit_code() const noexcept override { return Code; }           \
    };

SYMREEB_ERROR(ValidationError, "validation", 2)
SYMREEB_ERROR(DegeneracyError, "degenerate", 3)
SYMREEB_ERROR(IllConditionedError, "ill_conditioned", 3)
SYMREEB_ERROR(RefineError, "refine", 3)
SYMREEB_ERROR(DomainError, "domain", 3)
SYMREEB_ERROR(GeometryError, "geometry", 3)
SYMREEB_ERROR(CollisionError, "collision", 3)
SYMREEB_ERROR(ConvergenceError, "convergence", 3)
SYMREEB_ERROR(NotFoundError, "not_found", 3)
SYMREEB_ERROR(UnclassifiableError, "unclassifiable", 3)
SYMREEB_ERROR(NonReturnError, "non_return", 3)
SYMREEB_ERROR(InternalError, "internal", 3)

#undef SYMREEB_ERROR

}  // namespace symreeb
