// Timings for the hot paths: index engines, integration, shooting, return maps, linking.

#include <symreeb/orbits.hpp>
#include <symreeb/sections.hpp>
#include <symreeb/sympath.hpp>

#include <benchmark/benchmark.h>

using namespace symreeb;

namespace {

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

SymmetricLoop rotation_loop(int n) {
    return SymmetricLoop::from_function(
        [](double t) {
            Mat2 S;
            S << 2 * kPi * (1.3 + 0.4 * std::cos(2 * kPi * t)), 0, 0, 2 * kPi * (1.3 - 0.2 * std::cos(4 * kPi * t));
            return S;
        },
        n, true);
}

OrbitRecord ellipsoid_p1() {
    ChordSpec spec;
    spec.seed = Vec4(1, 0, 0, 0);
    return shoot_chord(make_ellipsoid(1.0, kGolden), spec);
}

}  // namespace

static void BM_CzSpectral(benchmark::State& state) {
    const auto S = rotation_loop(128);
    SpectralOptions opt;
    opt.modes = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cz_index_spectral(S, 1, opt));
}
BENCHMARK(BM_CzSpectral)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_CzRotation(benchmark::State& state) {
    const auto path = path_from_loop(rotation_loop(128), 1);
    for (auto _ : state) benchmark::DoNotOptimize(cz_index_rotation(path));
}
BENCHMARK(BM_CzRotation)->Unit(benchmark::kMicrosecond);

static void BM_IntegrateEllipsoidPeriod(benchmark::State& state) {
    const auto m = make_ellipsoid(1.0, kGolden);
    for (auto _ : state) benchmark::DoNotOptimize(integrate(m, Vec4(0.6, 0, 0.8 * std::sqrt(kGolden), 0), kPi));
}
BENCHMARK(BM_IntegrateEllipsoidPeriod)->Unit(benchmark::kMicrosecond);

static void BM_Variational(benchmark::State& state) {
    const auto p1 = ellipsoid_p1();
    for (auto _ : state) benchmark::DoNotOptimize(integrate_variational(p1.trajectory));
}
BENCHMARK(BM_Variational)->Unit(benchmark::kMillisecond);

static void BM_ComputeIndices(benchmark::State& state) {
    const auto p1 = ellipsoid_p1();
    for (auto _ : state) {
        OrbitRecord o = p1;
        o.monodromy.reset();
        compute_indices(o);
        benchmark::DoNotOptimize(o.indices);
    }
}
BENCHMARK(BM_ComputeIndices)->Unit(benchmark::kMillisecond);

static void BM_ShootHenonHeiles(benchmark::State& state) {
    const auto m = make_henon_heiles(0.1);
    const auto seeds = fixed_curve_seeds(m, "rho", 0.1, 16, 0.6);
    ChordSpec spec;
    spec.energy = 0.1;
    spec.end_involution = "rho_sigma";
    for (auto _ : state) benchmark::DoNotOptimize(orbit_search(m, spec, seeds, {}, 1));
}
BENCHMARK(BM_ShootHenonHeiles)->Unit(benchmark::kMillisecond);

static void BM_HopfReturnMap(benchmark::State& state) {
    const auto d = page(make_hopf(), 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(return_map(d, Vec2(0.3, -0.2)));
}
BENCHMARK(BM_HopfReturnMap)->Unit(benchmark::kMicrosecond);

static void BM_SelfLinking(benchmark::State& state) {
    const auto p1 = ellipsoid_p1();
    const auto frame = build_frame(p1.trajectory, false);
    for (auto _ : state) benchmark::DoNotOptimize(self_linking(p1, frame));
}
BENCHMARK(BM_SelfLinking)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
