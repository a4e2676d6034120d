#include "oracles.hpp"

#include <symreeb/systems.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace symreeb;

namespace {

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

std::vector<SystemModel> all_models() {
    return {make_hopf(), make_ellipsoid(1.0, kGolden), make_pcr3bp(0.5, -2.1),
            make_pcr3bp(0.3, -1.8), make_hill(-3.0), make_henon_heiles(0.1)};
}

Vec4 random_regular_point(std::mt19937_64& rng, const SystemModel& m) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (;;) {
        Vec4 z(u(rng), u(rng), u(rng), u(rng));
        if (m.distance_to_singular(z) > 0.1) return z;
    }
}

}  // namespace

TEST(Systems, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(1);
    for (const auto& m : all_models()) {
        for (int i = 0; i < 100; ++i) {
            const Vec4 z = random_regular_point(rng, m);
            const Vec4 g = m.gradient(z);
            Vec4 fd;
            const double h = 1e-6;
            for (int j = 0; j < 4; ++j) {
                Vec4 e = Vec4::Zero();
                e(j) = h;
                fd(j) = (m.H(z + e) - m.H(z - e)) / (2 * h);
            }
            EXPECT_LT((fd - g).norm(), 1e-6 * std::max(1.0, g.norm())) << to_string(m.name);
        }
    }
}

TEST(Systems, HessianMatchesGradientDifferences) {
    std::mt19937_64 rng(2);
    for (const auto& m : all_models()) {
        for (int i = 0; i < 50; ++i) {
            const Vec4 z = random_regular_point(rng, m);
            const Mat4 H = m.hessian(z);
            Mat4 fd;
            const double h = 1e-6;
            for (int j = 0; j < 4; ++j) {
                Vec4 e = Vec4::Zero();
                e(j) = h;
                fd.col(j) = (m.gradient(z + e) - m.gradient(z - e)) / (2 * h);
            }
            EXPECT_LT((fd - H).norm(), 1e-5 * std::max(1.0, H.norm())) << to_string(m.name);
            EXPECT_LT((H - H.transpose()).norm(), 1e-14);
        }
    }
}

TEST(Systems, MechanicalFormulasInCanonicalOrder) {
    // PCR3BP written in (q1, q2, p1, p2) exactly as the classical formula
    const double mu = 0.3;
    const auto m = make_pcr3bp(mu, -1.8);
    auto H = [mu](double q1, double q2, double p1, double p2) {
        return 0.5 * (p1 * p1 + p2 * p2) - (1 - mu) / std::hypot(q1, q2) -
               mu / std::hypot(q1 - 1, q2) + q1 * p2 - q2 * p1 - mu * p2;
    };
    EXPECT_NEAR(m.H(from_mechanical(0.3, -0.7, 0.2, 1.1)), H(0.3, -0.7, 0.2, 1.1), 1e-15);
    const auto hh = make_henon_heiles(0.1);
    const double q1 = 0.2, q2 = -0.3, p1 = 0.1, p2 = 0.25;
    EXPECT_NEAR(hh.H(from_mechanical(q1, q2, p1, p2)),
                0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 -
                    q2 * q2 * q2 / 3,
                1e-15);
    const auto hill = make_hill(-3);
    EXPECT_NEAR(hill.H(from_mechanical(q1, q2, p1, p2)),
                0.5 * (p1 * p1 + p2 * p2) + q1 * p2 - q2 * p1 - 1 / std::hypot(q1, q2) - q1 * q1 +
                    0.5 * q2 * q2,
                1e-14);
}

TEST(Systems, InvolutionsAreExactAntiSymplecticInvolutions) {
    const Mat4 J = J4();
    for (const auto& m : all_models()) {
        for (const auto& R : m.involutions) {
            EXPECT_EQ(R.matrix * R.matrix, Mat4::Identity()) << R.label;
            EXPECT_EQ(R.matrix.transpose() * J * R.matrix, -J) << R.label;
            EXPECT_EQ(R.kind, InvolutionKind::anti_symplectic);
            for (int j = 0; j < R.fixed_basis.cols(); ++j)
                EXPECT_LE((R.matrix * R.fixed_basis.col(j) - R.fixed_basis.col(j)).norm(), 1e-12);
            EXPECT_EQ(R.fixed_basis.cols(), 2);
        }
    }
}

TEST(Systems, HenonHeilesCyclicSymmetry) {
    const auto m = make_henon_heiles(0.1);
    const Mat4 s = m.cyclic_symmetry->matrix;
    const Mat4 J = J4();
    EXPECT_LT((s.transpose() * J * s - J).norm(), 1e-15);
    EXPECT_LT((s * s * s - Mat4::Identity()).norm(), 1e-14);
    const Mat4 rho = m.involution("rho").matrix;
    EXPECT_LT((s * rho * s - rho).norm(), 1e-15);
    const auto rs = m.involution("rho_sigma");
    EXPECT_EQ(rs.kind, InvolutionKind::anti_symplectic);
    EXPECT_LT((rs.matrix - s * rho).norm(), 1e-15);
    EXPECT_LT((m.involution("sigma2_rho").matrix - s * s * rho).norm(), 1e-15);
}

TEST(Systems, SymmetriesPreserveHamiltonian) {
    std::mt19937_64 rng(3);
    for (const auto& m : all_models()) {
        std::vector<Mat4> maps;
        for (const auto& R : m.involutions) maps.push_back(R.matrix);
        if (m.cyclic_symmetry) maps.push_back(m.cyclic_symmetry->matrix);
        for (int i = 0; i < 1000; ++i) {
            const Vec4 z = random_regular_point(rng, m);
            for (const auto& R : maps)
                EXPECT_NEAR(m.H(R * z), m.H(z), 1e-12 * std::max(1.0, std::abs(m.H(z))));
        }
    }
}

TEST(Systems, VectorFieldEquivariance) {
    std::mt19937_64 rng(4);
    for (const auto& m : all_models()) {
        for (int i = 0; i < 200; ++i) {
            const Vec4 z = random_regular_point(rng, m);
            const Vec4 X = hamiltonian_vector_field(m, z);
            EXPECT_NEAR(m.gradient(z).dot(X), 0.0, 1e-10 * std::max(1.0, X.squaredNorm()));
            for (const auto& R : m.involutions)
                EXPECT_LT((R.matrix * X + hamiltonian_vector_field(m, R.matrix * z)).norm(),
                          1e-10 * std::max(1.0, X.norm()));
            if (m.cyclic_symmetry) {
                const Mat4& s = m.cyclic_symmetry->matrix;
                EXPECT_LT((s * X - hamiltonian_vector_field(m, s * z)).norm(), 1e-10);
            }
        }
    }
}

TEST(Systems, EllipsoidAndHopfVectorField) {
    const double r1sq = 2.0;
    const auto e = make_ellipsoid(r1sq, 3.0);
    const double r1 = std::sqrt(r1sq);
    const Vec4 X = hamiltonian_vector_field(e, Vec4(r1, 0, 0, 0));
    EXPECT_NEAR(X(1), 2.0 / r1, 1e-15);
    EXPECT_NEAR(X(0), 0.0, 1e-15);
    EXPECT_NEAR(X.norm(), 2.0 / r1, 1e-15);
    EXPECT_EQ(hamiltonian_vector_field(make_hopf(), Vec4(1, 0, 0, 0)), Vec4(0, 2, 0, 0));
}

TEST(Systems, CollisionIsDomainError) {
    const auto m = make_pcr3bp(0.5, -2.1);
    EXPECT_THROW(hamiltonian_vector_field(m, from_mechanical(1.0, 0, 0.3, 0.1)), DomainError);
}

TEST(Systems, ReebRescaling) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    const auto e = make_ellipsoid(1.0, kGolden);
    const auto sphere = pullback_to_sphere(e, 200);
    const auto hh = pullback_to_sphere(make_henon_heiles(0.1), 500);
    for (int i = 0; i < 50; ++i) {
        Vec4 u(n(rng), n(rng), n(rng), n(rng));
        u.normalize();
        EXPECT_NEAR(reeb_rescaling(e, sphere.from_sphere(u)), 1.0, 1e-10);
        EXPECT_NEAR(reeb_rescaling(make_hopf(), u), 1.0, 1e-12);
        EXPECT_GT(reeb_rescaling(hh.base, hh.from_sphere(u)), 0.0);
    }
}

TEST(Systems, PullbackRadialFunction) {
    const auto e = make_ellipsoid(1.0, kGolden);
    const auto s = pullback_to_sphere(e, 100);
    EXPECT_NEAR(s.f(Vec4(1, 0, 0, 0)), 1.0, 1e-13);
    EXPECT_NEAR(s.f(Vec4(0, 0, 1, 0)), kGolden, 1e-13);
    const Vec4 u = Vec4(0.3, -0.2, 0.5, 0.7).normalized();
    EXPECT_NEAR(s.f(u), 1.0 / e.H(u), 1e-13);
    const auto hopf = pullback_to_sphere(make_hopf(), 100);
    EXPECT_NEAR((hopf.from_sphere(u) - u).norm(), 0.0, 1e-14);
    EXPECT_THROW(pullback_to_sphere(make_hill(-3.0)), GeometryError);
}

TEST(Systems, HenonHeilesAboveCriticalLevelIsNotStarShaped) {
    EXPECT_THROW(pullback_to_sphere(make_henon_heiles(0.2), 500), GeometryError);
}

TEST(Systems, HenonHeilesChartNormalForm) {
    const auto s = pullback_to_sphere(make_henon_heiles(0.1), 200);
    const Mat4 P = henon_heiles_chart();
    const Mat4 J = J4();
    EXPECT_LT((P.transpose() * J * P - J).norm(), 1e-15);
    // rho0(q1,q2,p1,p2) = (-q1,-q2,p1,p2) in canonical order
    EXPECT_LT((s.chart_involutions.front().matrix - antis_matrix(kPi, kPi)).norm(), 1e-15);
    // the transported cyclic symmetry is g_{3,2}; g_{3,1} is excluded
    EXPECT_LT((s.chart_cyclic->matrix - g_matrix(3, 2)).norm(), 1e-14);
    EXPECT_GT((s.chart_cyclic->matrix - g_matrix(3, 1)).norm(), 1.0);
}

TEST(Systems, LensActionAndAntisFamily) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> th(0.0, kTwoPi);
    const Mat4 J = J4();
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 1}, {3, 2}, {5, 2}, {7, 3}}) {
        const Mat4 g = g_matrix(p, q);
        Mat4 acc = Mat4::Identity();
        for (int j = 1; j <= p; ++j) {
            acc = g * acc;
            if (j < p) EXPECT_GT((acc - Mat4::Identity()).norm(), 1e-3);
        }
        EXPECT_LT((acc - Mat4::Identity()).norm(), 1e-13);
        EXPECT_LT((g.transpose() * J * g - J).norm(), 1e-15);
        for (int i = 0; i < 10; ++i) {
            const Mat4 rho = antis_matrix(th(rng), th(rng));
            EXPECT_LT((g * rho * g - rho).norm(), 1e-14);
            EXPECT_LT((rho.transpose() * J * rho + J).norm(), 1e-15);
            EXPECT_LT((rho * rho - Mat4::Identity()).norm(), 1e-15);
        }
    }
    EXPECT_THROW(g_matrix(4, 2), ValidationError);
}

TEST(Systems, InvolutionLabels) {
    const auto hill = make_hill(-3);
    EXPECT_EQ(hill.involution("rho1").matrix, Vec4(1, -1, -1, 1).asDiagonal().toDenseMatrix());
    EXPECT_EQ(hill.involution("rho2").matrix, Vec4(-1, 1, 1, -1).asDiagonal().toDenseMatrix());
    const auto hopf = make_hopf();
    EXPECT_EQ(hopf.involution("g_2_1").kind, InvolutionKind::symplectic);
    EXPECT_EQ(hopf.involution("g_2_1_rho").kind, InvolutionKind::anti_symplectic);
    EXPECT_THROW(hopf.involution("g_3_1"), ValidationError);
    EXPECT_THROW(hopf.involution("tau"), ValidationError);
    EXPECT_THROW(make_system("kepler", {}), ValidationError);
}

TEST(LeviCivita, IntertwinesInvolutions) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Mat4 rho = make_pcr3bp(0.5, -2).involution("rho").matrix;
    const Mat4 r1 = levi_civita_rho1(), r2 = levi_civita_rho2();
    EXPECT_EQ(r1 * r2, -Mat4::Identity());
    for (int i = 0; i < 100; ++i) {
        const Vec4 w(u(rng), u(rng), u(rng), u(rng));
        EXPECT_LT((levi_civita_project(r1 * w) - rho * levi_civita_project(w)).norm(), 1e-12);
        EXPECT_LT((levi_civita_project(r2 * w) - rho * levi_civita_project(w)).norm(), 1e-12);
        const Vec4 base = levi_civita_project(w);
        const Vec4 back = levi_civita_lift(base);
        // the lift picks one of the two preimages +-w
        EXPECT_LT(std::min((back - w).norm(), (back + w).norm()), 1e-12);
        EXPECT_LT((levi_civita_project(levi_civita_lift(base)) - base).norm(), 1e-12);
    }
}

TEST(LeviCivita, FixedPointLiftsIntoFixRho1) {
    const Vec4 base = from_mechanical(0.8, 0.0, 0.0, 1.3);
    const Vec4 w = levi_civita_lift(base);
    EXPECT_LT((levi_civita_rho1() * w - w).norm(), 1e-15);
    EXPECT_NEAR(w(0), std::sqrt(0.4), 1e-15);
    EXPECT_THROW(levi_civita_lift(Vec4::Zero()), DomainError);
    EXPECT_THROW(levi_civita_project(Vec4(0, 1, 0, 1)), DomainError);
}

TEST(CriticalValues, HenonHeiles) {
    const auto v = critical_values(make_henon_heiles(0.1));
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(v[0], 0.0, 1e-10);
    EXPECT_NEAR(v[1], 1.0 / 6.0, 1e-10);
    for (const auto& c : critical_points(make_henon_heiles(0.1))) EXPECT_LT(c.gradient_norm, 1e-10);
    EXPECT_EQ(critical_points(make_henon_heiles(0.1)).size(), 4u);
}

TEST(CriticalValues, Hill) {
    const auto v = critical_values(make_hill(-3));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NEAR(v[0], -std::pow(3.0, 4.0 / 3.0) / 2.0, 1e-10);
}

TEST(CriticalValues, Pcr3bpEqualMasses) {
    const auto v = critical_values(make_pcr3bp(0.5, -2.1));
    ASSERT_EQ(v.size(), 3u);
    // effective potential V(q) = -|q - (mu,0)|^2/2 - (1-mu)/|q| - mu/|q - (1,0)|
    const double mu = 0.5;
    auto dV = [mu](double x) {  // derivative along the axis beyond the second primary
        return -(x - mu) + (1 - mu) / (x * x) + mu / ((x - 1) * (x - 1));
    };
    double lo = 1.05, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dV(lo) * dV(mid) <= 0 ? hi : lo) = mid;
    }
    const double x = 0.5 * (lo + hi);
    const double L2 = -0.5 * (x - mu) * (x - mu) - (1 - mu) / x - mu / (x - 1);
    EXPECT_NEAR(v[0], -2.0, 1e-10);
    EXPECT_NEAR(v[1], L2, 1e-10);
    EXPECT_NEAR(v[2], -1.375, 1e-10);
}

TEST(CriticalValues, Pcr3bpUnequalMassesHasFour) {
    EXPECT_EQ(critical_values(make_pcr3bp(0.3, -1.8)).size(), 4u);
    EXPECT_THROW(critical_values(make_hopf()), ValidationError);
}
