#include "oracles.hpp"

#include <symreeb/flow.hpp>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace symreeb;

namespace {

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

struct Orbit {
    SystemModel model;
    Trajectory traj;
    MonodromyPath mono;
};

Orbit ellipsoid_orbit(int which) {
    Orbit o{make_ellipsoid(1.0, kGolden), {}, {}};
    const Vec4 z0 = which == 1 ? Vec4(1, 0, 0, 0) : Vec4(0, 0, std::sqrt(kGolden), 0);
    const double T = which == 1 ? kPi : kPi * kGolden;
    o.traj = integrate(o.model, z0, T);
    o.mono = integrate_variational(o.traj);
    return o;
}

}  // namespace

TEST(Flow, HopfFiberCloses) {
    const auto tr = integrate(make_hopf(), Vec4(1, 0, 0, 0), kPi);
    EXPECT_LT((tr.states.back() - tr.states.front()).norm(), 1e-10);
    EXPECT_LT((tr.states[tr.size() / 2] - Vec4(-1, 0, 0, 0)).norm(), 1e-10);
}

TEST(Flow, EllipsoidMatchesClosedForm) {
    const auto m = make_ellipsoid(1.0, kGolden);
    const Vec4 z0(0.6, 0.1, 0.5, -0.4 * std::sqrt(kGolden));
    const double T = 2.7;
    const auto tr = integrate(m, z0, T);
    for (std::size_t i = 0; i < tr.size(); i += 17)
        EXPECT_LT((tr.states[i] - oracle::ellipsoid_flow(z0, 1.0, kGolden, tr.times[i])).norm(), 1e-9);
    EXPECT_LT(tr.energy_drift, 1e-10);
}

TEST(Flow, EllipsoidOrbitsClose) {
    for (int which : {1, 2}) {
        const auto o = ellipsoid_orbit(which);
        EXPECT_LT((o.traj.states.back() - o.traj.states.front()).norm(), 1e-10);
    }
}

TEST(Flow, ZeroTimeGivesSingleSample) {
    const auto tr = integrate(make_hopf(), Vec4(1, 0, 0, 0), 0.0);
    EXPECT_EQ(tr.size(), 1u);
    EXPECT_THROW(integrate(make_hopf(), Vec4(1, 0, 0, 0), -1.0), ValidationError);
}

TEST(Flow, CollisionIsReported) {
    // released at rest (in the rotating frame) close to the earth
    auto m = make_pcr3bp(0.5, -2.0);
    m.collision_radius = 0.02;
    EXPECT_THROW(integrate(m, from_mechanical(0.2, 0.0, 0.0, 0.2), 2.0), CollisionError);
}

TEST(Flow, ReversibilityOfPcr3bp) {
    const auto m = make_pcr3bp(0.5, -2.1);
    const Mat4 R = m.involution("rho").matrix;
    const Vec4 z = from_mechanical(0.3, 0.05, 0.2, 1.1);
    const Vec4 w = flow_endpoint(m, z, 0.7);
    EXPECT_LT((flow_endpoint(m, R * w, 0.7) - R * z).norm(), 1e-9);
}

TEST(Flow, ReversibilityOfHenonHeiles) {
    const auto m = make_henon_heiles(0.1);
    const Vec4 z = from_mechanical(0.1, -0.2, 0.3, 0.15);
    for (const auto& inv : m.involutions) {
        const Vec4 w = flow_endpoint(m, z, 3.1);
        EXPECT_LT((flow_endpoint(m, inv.matrix * w, 3.1) - inv.matrix * z).norm(), 1e-9) << inv.label;
    }
}

TEST(Flow, EllipsoidMonodromyEigenvalues) {
    const auto o = ellipsoid_orbit(1);
    const Eigen::EigenSolver<Mat4> es(o.mono.matrices.back());
    const std::complex<double> rot = std::polar(1.0, kTwoPi / kGolden);
    int ones = 0, rotations = 0;
    for (int i = 0; i < 4; ++i) {
        const auto ev = es.eigenvalues()(i);
        if (std::abs(ev - 1.0) < 1e-7) ++ones;
        if (std::abs(ev - rot) < 1e-7 || std::abs(ev - std::conj(rot)) < 1e-7) ++rotations;
    }
    EXPECT_EQ(ones, 2);
    EXPECT_EQ(rotations, 2);
    EXPECT_LT(o.mono.symplectic_defect, 1e-8);
}

TEST(Flow, HopfMonodromyIsIdentity) {
    const auto tr = integrate(make_hopf(), Vec4(0.6, 0, 0, 0.8), kPi);
    const auto mono = integrate_variational(tr);
    EXPECT_LT((mono.matrices.back() - Mat4::Identity()).norm(), 1e-8);
}

TEST(Flow, GlobalFrameIsContactAndNormalized) {
    const auto m = make_henon_heiles(0.1);
    const auto tr = integrate(m, from_mechanical(0.2, 0.1, 0.25, -0.3), 2.0);
    const auto fr = build_frame(tr, false);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const Vec4& x = tr.states[i];
        EXPECT_NEAR(omega0(fr.e1[i], fr.e2[i]), 1.0, 1e-12);
        EXPECT_NEAR(lambda0(x, fr.e1[i]), 0.0, 1e-12);
        EXPECT_NEAR(lambda0(x, fr.e2[i]), 0.0, 1e-12);
        EXPECT_NEAR(m.gradient(x).dot(fr.e1[i]), 0.0, 1e-12);
    }
}

TEST(Flow, FrameDerivativesMatchFiniteDifferences) {
    const auto m = make_henon_heiles(0.1);
    IntegrateOptions opt;
    opt.samples = 2000;
    const auto tr = integrate(m, from_mechanical(0.2, 0.1, 0.25, -0.3), 2.0, opt);
    for (FrameKind kind : {FrameKind::global, FrameKind::reference}) {
        FrameOptions fo;
        fo.kind = kind;
        const auto fr = build_frame(tr, false, std::nullopt, fo);
        const double h = tr.times[1] - tr.times[0];
        for (std::size_t i = 1; i + 1 < tr.size(); i += 97) {
            const Vec4 fd1 = (fr.e1[i + 1] - fr.e1[i - 1]) / (2 * h);
            const Vec4 fd2 = (fr.e2[i + 1] - fr.e2[i - 1]) / (2 * h);
            EXPECT_LT((fd1 - fr.de1[i]).norm(), 1e-5);
            EXPECT_LT((fd2 - fr.de2[i]).norm(), 1e-5);
        }
    }
}

TEST(Flow, SymmetricFrameSatisfiesConjugation) {
    for (int which : {1, 2}) {
        const auto o = ellipsoid_orbit(which);
        const auto& R = o.model.involutions.front();
        const auto fr = build_frame(o.traj, true, R);
        EXPECT_TRUE(fr.symmetric);
        EXPECT_LT(fr.symmetry_residual, 1e-8);
        const std::size_t n = fr.times.size() - 1;
        for (std::size_t j = 0; j <= n; j += 13) {
            EXPECT_LT((R.matrix * fr.e1[j] - fr.e1[n - j]).norm(), 1e-8);
            EXPECT_LT((R.matrix * fr.e2[j] + fr.e2[n - j]).norm(), 1e-8);
        }
        EXPECT_EQ(relative_winding(fr, build_frame(o.traj, false)), 0);
        EXPECT_EQ(fr.winding_offset, 0);
    }
}

TEST(Flow, SymmetricFrameRejectsAsymmetricTrajectory) {
    const auto m = make_ellipsoid(1.0, kGolden);
    const auto tr = integrate(m, Vec4(0, 1, 0, 0), kPi);  // starts off Fix(rho)
    EXPECT_THROW(build_frame(tr, true, m.involutions.front()), ValidationError);
}

// Along P1 the contact planes are the z2-plane; the global frame turns once
// against the constant frame there.
TEST(Flow, GlobalVersusConstantFrameOnP1) {
    const auto o = ellipsoid_orbit(1);
    FrameOptions fo;
    fo.kind = FrameKind::reference;
    fo.reference = Vec4(0, 0, 1, 0);
    const auto constant = build_frame(o.traj, false, std::nullopt, fo);
    for (std::size_t i = 0; i < constant.times.size(); i += 50)
        EXPECT_LT((constant.e1[i] - Vec4(0, 0, 1, 0)).norm(), 1e-10);
    EXPECT_EQ(relative_winding(build_frame(o.traj, false), constant), 1);
    EXPECT_EQ(relative_winding(constant, build_frame(o.traj, false)), -1);
}

TEST(Flow, EllipsoidConleyZehnderIndices) {
    const auto p1 = ellipsoid_orbit(1);
    const auto path1 = transverse_path(p1.mono, build_frame(p1.traj, false));
    EXPECT_NEAR(rotation_number(path1), 1.0 + 1.0 / kGolden, 1e-8);
    EXPECT_EQ(cz_index_rotation(path1).mu_cz.value(), 3);
    EXPECT_EQ(cz_index_spectral(*path1.generator(), 1).mu_cz.value(), 3);

    const auto p2 = ellipsoid_orbit(2);
    const auto path2 = transverse_path(p2.mono, build_frame(p2.traj, false));
    EXPECT_NEAR(rotation_number(path2), 1.0 + kGolden, 1e-8);
    EXPECT_EQ(cz_index_rotation(path2).mu_cz.value(), 5);
    EXPECT_EQ(cz_index_spectral(*path2.generator(), 1).mu_cz.value(), 5);
}

TEST(Flow, EllipsoidIterates) {
    const auto p1 = ellipsoid_orbit(1);
    const auto path = transverse_path(p1.mono, build_frame(p1.traj, false));
    for (int k = 1; k <= 5; ++k) {
        // rotation number k (1 + 1/phi) is never an integer
        const int expected = 2 * static_cast<int>(std::floor(k * (1.0 + 1.0 / kGolden))) + 1;
        EXPECT_EQ(cz_index_rotation(iterate_path(path, k)).mu_cz.value(), expected) << k;
        EXPECT_EQ(cz_index_spectral(*path.generator(), k).mu_cz.value(), expected) << k;
    }
}

TEST(Flow, EllipsoidChordIndices) {
    for (int which : {1, 2}) {
        const auto o = ellipsoid_orbit(which);
        const auto fr = build_frame(o.traj, true, o.model.involutions.front());
        const auto td = transverse_data(o.mono, fr);
        EXPECT_LT(td.mirror_defect, 1e-6);
        const double expected = which == 1 ? 1.5 : 2.5;
        EXPECT_DOUBLE_EQ(rs_index_spectral(*td.path.generator()).mu_rs.value(), expected);
        EXPECT_DOUBLE_EQ(rs_index_crossing(td.path).mu_rs.value(), expected);
        const int cz = cz_index_rotation(td.path).mu_cz.value();
        EXPECT_EQ(cz, which == 1 ? 3 : 5);
    }
}

TEST(Flow, FrameChangeShiftsIndices) {
    const auto o = ellipsoid_orbit(1);
    FrameOptions fo;
    fo.kind = FrameKind::reference;
    fo.reference = Vec4(0, 0, 1, 0);
    const auto global = build_frame(o.traj, false);
    const auto constant = build_frame(o.traj, false, std::nullopt, fo);
    const int w = relative_winding(global, constant);
    const int cz_global = cz_index_rotation(transverse_path(o.mono, global)).mu_cz.value();
    const int cz_constant = cz_index_rotation(transverse_path(o.mono, constant)).mu_cz.value();
    EXPECT_EQ(cz_global, cz_constant + 2 * w);
    EXPECT_EQ(cz_constant, 1);

    // constant frame is symmetric for complex conjugation: e1 real, e2 = i e1
    auto sym_constant = constant;
    sym_constant.symmetric = true;
    const auto rs_constant = rs_index_crossing(transverse_path(o.mono, sym_constant)).mu_rs.value();
    const auto sym_global = build_frame(o.traj, true, o.model.involutions.front());
    const auto rs_global = rs_index_crossing(transverse_path(o.mono, sym_global)).mu_rs.value();
    EXPECT_DOUBLE_EQ(rs_global, retrivialized_rs(rs_constant, relative_winding(sym_global, constant)));
    EXPECT_DOUBLE_EQ(rs_constant, 0.5);
}

TEST(Flow, RotatedFrameShiftsIndexByTwicePerTurn) {
    const auto o = ellipsoid_orbit(2);
    const auto global = build_frame(o.traj, false);
    const double T = o.traj.duration();
    for (int turns : {-1, 1, 2}) {
        std::vector<double> beta, dbeta;
        for (double t : global.times) {
            beta.push_back(kTwoPi * turns * t / T);
            dbeta.push_back(kTwoPi * turns / T);
        }
        const auto rotated = rotate_frame(global, beta, dbeta);
        EXPECT_EQ(relative_winding(rotated, global), -turns);
        const int cz = cz_index_rotation(transverse_path(o.mono, rotated)).mu_cz.value();
        EXPECT_EQ(cz, 5 - 2 * turns);
    }
}

TEST(Flow, HopfFiberIsDegenerate) {
    const auto tr = integrate(make_hopf(), Vec4(1, 0, 0, 0), kPi);
    const auto path = transverse_path(integrate_variational(tr), build_frame(tr, false));
    EXPECT_LT((path.endpoint() - Mat2::Identity()).norm(), 1e-8);
    EXPECT_THROW(cz_index_rotation(path), DegeneracyError);
    EXPECT_THROW(rotation_number(path), DegeneracyError);
}

TEST(Flow, ReebTimeOnEllipsoidEqualsHamiltonianTime) {
    const auto m = make_ellipsoid(1.0, kGolden);
    IntegrateOptions opt;
    opt.reeb_time = true;
    const auto a = integrate(m, Vec4(1, 0, 0, 0), kPi, opt);
    const auto b = integrate(m, Vec4(1, 0, 0, 0), kPi);
    EXPECT_LT((a.states.back() - b.states.back()).norm(), 1e-10);
}

TEST(Flow, ReebTimeKeepsIndexOnScaledLevel) {
    // H = 2 (ellipsoid scaled by sqrt 2) reparametrizes the orbit, not its index
    const auto m = make_ellipsoid(1.0, kGolden);
    const double s = std::sqrt(2.0);
    IntegrateOptions opt;
    opt.reeb_time = true;
    auto tr_h = integrate(m, Vec4(s, 0, 0, 0), kPi);
    auto tr_r = integrate(m, Vec4(s, 0, 0, 0), 2 * kPi, opt);
    EXPECT_LT((tr_r.states.back() - tr_r.states.front()).norm(), 1e-9);
    const int cz_h = cz_index_rotation(transverse_path(integrate_variational(tr_h), build_frame(tr_h, false))).mu_cz.value();
    const int cz_r = cz_index_rotation(
        transverse_path(integrate_variational(tr_r, opt), build_frame(tr_r, false))).mu_cz.value();
    EXPECT_EQ(cz_h, 3);
    EXPECT_EQ(cz_r, 3);
}
