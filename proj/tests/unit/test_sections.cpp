#include <symreeb/sections.hpp>

#include <gtest/gtest.h>

#include <complex>
#include <sstream>

using namespace symreeb;

namespace {

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

// sigma rotates z1 only; rho_j = sigma^j o rho
Mat4 z1_rotation(double a) {
    Mat4 m = Mat4::Identity();
    m.block<2, 2>(0, 0) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return m;
}

// the ellipsoid flow on a page: both phases advance at 2/r_j^2, so the first
// return is tau = pi r2^2 and w turns by 2 pi r2^2 / r1^2
Vec2 ellipsoid_image(const Vec2& w, double r1sq, double r2sq) {
    const std::complex<double> z(w(0), w(1));
    const auto out = std::polar(1.0, kTwoPi * r2sq / r1sq) * z;
    return Vec2(out.real(), out.imag());
}

}  // namespace

TEST(Section, HopfPageInvariantOnlyAtHalfPi) {
    const auto m = make_hopf();
    const auto d = page(m, kPi / 2);
    ASSERT_EQ(d.invariant_flag.size(), 1u);
    EXPECT_EQ(d.invariant_flag[0], "rho");
    const auto rho = m.involution("rho");
    EXPECT_TRUE(invariance_check(d, rho).invariant);
    EXPECT_TRUE(invariance_check(page(m, 3 * kPi / 2), rho).invariant);

    const auto d0 = page(m, 0.0);
    EXPECT_TRUE(d0.invariant_flag.empty());
    const auto r = invariance_check(d0, rho);
    EXPECT_FALSE(r.invariant);
    EXPECT_GT(r.distance, 0.1);
    EXPECT_LT(angle_gap(r.image_theta, kPi), 1e-12);
    EXPECT_LT(r.distance_to_image, 1e-6);
}

TEST(Section, HopfReflectedPagesForAllRhoJ) {
    const auto m = make_hopf();
    const Mat4 rho = m.involution("rho").matrix;
    for (int p : {2, 3, 5}) {
        for (int j = 0; j < p; ++j) {
            const Mat4 rj = antis_matrix(kTwoPi * j / p, kPi);
            EXPECT_LT((rj - z1_rotation(kTwoPi * j / p) * rho).norm(), 1e-14);
            const auto inv = make_involution(rj, "rho_" + std::to_string(j));
            for (double theta : {0.0, 0.3, 1.1, kPi / 2, 4.0}) {
                const auto r = invariance_check(page(m, theta, 100), inv);
                EXPECT_LT(angle_gap(r.image_theta, kPi - theta), 1e-12);
                EXPECT_LT(r.distance_to_image, 1e-6);
                EXPECT_EQ(r.invariant, angle_gap(theta, kPi / 2) < 1e-9);
            }
        }
    }
}

TEST(Section, HopfBoundaryAndTransversality) {
    const auto d = page(make_hopf(), 0.7);
    EXPECT_NEAR(d.boundary_period, kPi, 1e-15);
    EXPECT_NEAR(d.min_transversality, 2.0, 1e-9);
    for (double a : {0.0, 1.0, 2.5}) {
        const Vec4 x = d.embed(Vec2(std::cos(a), std::sin(a)));
        EXPECT_LT(std::hypot(x(2), x(3)), 1e-15);
        EXPECT_NEAR(x.norm(), 1.0, 1e-15);
    }
}

TEST(Section, HopfReturnIsIdentityWithTimePi) {
    const auto d = page(make_hopf(), 0.4);
    const auto pts = interior_grid(20);
    ASSERT_GT(pts.size(), 250u);
    const auto samples = return_grid(d, pts, {}, 4);
    for (const auto& s : samples) {
        EXPECT_NEAR(s.tau, kPi, 1e-8);
        EXPECT_LT((s.image - s.point).norm(), 1e-8);
        EXPECT_LT(s.landing_residual, 1e-8);
        EXPECT_GT(s.min_phase_rate, 0.0);
    }
}

TEST(Section, ReturnRejectsBoundaryAndOtherSystems) {
    const auto d = page(make_hopf(), 0.0);
    EXPECT_THROW(return_map(d, Vec2(1.0, 0.0)), ValidationError);
    EXPECT_THROW(return_map(d, Vec2(0.8, 0.8)), ValidationError);
    EXPECT_THROW(page(make_henon_heiles(0.1), 0.0), ValidationError);
}

TEST(Section, NonReturnReported) {
    const auto d = page(make_hopf(), 0.0);
    ReturnOptions opt;
    opt.horizon_periods = 0.5;
    EXPECT_THROW(return_map(d, Vec2(0.1, 0.2), opt), NonReturnError);
}

TEST(Section, EllipsoidReturnIsRotation) {
    for (auto [r1, r2] : {std::pair{1.0, kGolden}, std::pair{2.0, 1.0}, std::pair{1.0, 1.3}}) {
        const auto d = page(make_ellipsoid(r1, r2), 0.0);
        EXPECT_NEAR(d.min_transversality, 2.0 / r2, 1e-9);
        for (const Vec2& w : {Vec2(0.2, -0.1), Vec2(-0.5, 0.6), Vec2(0.0, 0.9)}) {
            const auto s = return_map(d, w);
            EXPECT_NEAR(s.tau, kPi * r2, 1e-8);
            EXPECT_LT((s.image - ellipsoid_image(w, r1, r2)).norm(), 1e-8);
            EXPECT_LT(s.landing_residual, 1e-8);
        }
    }
}

TEST(Section, EllipsoidFixedPointOnSecondOrbit) {
    const auto m = make_ellipsoid(1.0, kGolden);
    const auto d = page(m, 0.0);
    ASSERT_EQ(d.invariant_flag.size(), 1u);
    const auto f = symmetric_fixed_point(d, m.involution("rho"));
    EXPECT_FALSE(f.continuum);
    EXPECT_LT(f.displacement, 1e-8);
    EXPECT_LT(f.involution_residual, 1e-10);
    const Vec4 x = d.embed(f.point);
    EXPECT_LT(std::hypot(x(0), x(1)), 1e-6);
    EXPECT_NEAR(std::hypot(x(2), x(3)), std::sqrt(kGolden), 1e-6);
}

TEST(Section, HopfFixedArcIsAllFixed) {
    const auto m = make_hopf();
    const auto f = symmetric_fixed_point(page(m, kPi / 2), m.involution("rho"));
    EXPECT_TRUE(f.continuum);
    EXPECT_LT(f.point.norm(), 1e-15);
    EXPECT_LT(f.displacement, 1e-8);
}

TEST(Section, FixedPointNeedsInvariantPage) {
    const auto m = make_hopf();
    EXPECT_THROW(symmetric_fixed_point(page(m, 0.0), m.involution("rho")), ValidationError);
}

TEST(Section, ReversibilityOnInvariantPages) {
    const auto pts = interior_grid(20);
    const auto e = make_ellipsoid(1.0, kGolden);
    EXPECT_LT(reversibility_defect(page(e, 0.0), e.involution("rho"), pts), 1e-6);
    const auto h = make_hopf();
    EXPECT_LT(reversibility_defect(page(h, kPi / 2), h.involution("rho"), pts), 1e-6);
}

TEST(Section, HalfPageRelation) {
    const auto m = make_ellipsoid(1.0, kGolden);
    const auto d0 = page(m, 0.0), dpi = page(m, kPi);
    const auto samples = return_grid(d0, interior_grid(20), {}, 4);
    EXPECT_LT(half_page_defect(d0, samples), 1e-6);

    const auto rho = m.involution("rho");
    const auto f0 = symmetric_fixed_point(d0, rho);
    const auto fpi = symmetric_fixed_point(dpi, rho);
    const Vec4 moved = flow_endpoint(m, d0.embed(f0.point), 0.5 * f0.sample.tau);
    EXPECT_LT((moved - dpi.embed(fpi.point)).norm(), 1e-8);
}

TEST(Section, AreaPreserved) {
    for (const auto& m : {make_hopf(), make_ellipsoid(1.0, kGolden), make_ellipsoid(2.0, 0.7)}) {
        const auto d = page(m, 0.3);
        for (const Vec2& w : {Vec2(0.1, 0.2), Vec2(-0.4, 0.5), Vec2(0.7, 0.0)})
            EXPECT_LT(area_defect(d, w, 1e-3), 1e-4);
    }
}

TEST(Section, ParallelGridMatchesSerial) {
    const auto d = page(make_ellipsoid(1.0, kGolden), 0.0);
    const auto pts = interior_grid(6);
    const auto a = return_grid(d, pts, {}, 1), b = return_grid(d, pts, {}, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].tau, b[i].tau);
        EXPECT_EQ(a[i].image, b[i].image);
    }
}

TEST(Section, CsvAndSvgExport) {
    const auto d = page(make_hopf(), 0.0);
    const auto samples = return_grid(d, interior_grid(3));
    std::ostringstream csv, svg;
    write_return_csv(csv, samples, 1e-12);
    write_return_svg(svg, samples);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "u,v,tau,u_image,v_image,tau_tol,landing_residual");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, static_cast<int>(samples.size()));
    EXPECT_NE(svg.str().find("<svg"), std::string::npos);
    EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}
