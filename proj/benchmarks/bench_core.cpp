#include <benchmark/benchmark.h>

#include "pnlab/audit.hpp"
#include "pnlab/corrector.hpp"
#include "pnlab/epsilon.hpp"
#include "pnlab/homogenized.hpp"

namespace {

using namespace pnlab;

BoundaryData tilt_g() {
  return [](double, double x2, double) { return 0.3 * x2; };
}

void BM_EllipticSolve(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  EpsProblem pb{PeriodicProfile::sine(1.0), 0.1, build_half_grid(n, n), tilt_g()};
  Field init = field_from(pb.grid, [](double, double x2) { return 0.3 * x2; });
  for (auto _ : state) {
    Field u = solve_elliptic_eps(pb, init, 1e-8);
    benchmark::DoNotOptimize(u.v.data());
  }
}
BENCHMARK(BM_EllipticSolve)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

void BM_ParabolicStep(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  HalfGrid grid = build_half_grid(n, n);
  EpsProblem pb{PeriodicProfile::sine(1.0), 0.1, grid, tilt_g()};
  Field u0 = field_from(grid, [](double, double x2) { return 0.3 * x2; });
  double dt = 0.25 * std::min(grid.hx, grid.hy) * std::min(grid.hx, grid.hy);
  for (auto _ : state) {
    Trajectory tr = solve_parabolic_eps(pb, u0, dt, 16.0 * dt);
    benchmark::DoNotOptimize(tr.snapshots.back().v.data());
  }
}
BENCHMARK(BM_ParabolicStep)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_HomStep(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  HalfGrid grid = build_half_grid(n, n);
  HomProblem pb{PeriodicProfile::sine(1.0), grid, tilt_g(), 0.0, 0.0};
  HomState s = hom_state_from_field(field_from(grid, [](double, double x2) { return 0.3 * x2; }),
                                    pb);
  for (auto _ : state) {
    HomState nxt = step_homogenized(s, pb);
    benchmark::DoNotOptimize(nxt.u.v.data());
  }
}
BENCHMARK(BM_HomStep)->Arg(65)->Arg(129);

void BM_PinningRoots(benchmark::State& state) {
  PeriodicProfile f = PeriodicProfile::sine(1.0);
  for (auto _ : state) {
    HorizontalRoots r = horizontal_pinning_roots(f, static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(r.w_plus);
  }
}
BENCHMARK(BM_PinningRoots)->Arg(10)->Arg(200);

void BM_SupConvolution(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  HalfGrid grid = build_half_grid(n, n);
  SpaceTimeField u = space_time_from(grid, n, 1e-3, [](double x1, double x2, double t) {
    return x1 * x1 - 0.5 * x2 * x2 + t * x2;
  });
  for (auto _ : state) {
    SpaceTimeField v = tangential_sup_convolution(u, 0.05);
    benchmark::DoNotOptimize(v.v.data());
  }
}
BENCHMARK(BM_SupConvolution)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

void BM_FaceScalarSolve(benchmark::State& state) {
  PeriodicProfile f = PeriodicProfile::sine(2.0);
  double v0 = 0.2;
  for (auto _ : state) {
    double v = face_scalar_solve(f, 1.0 / 64.0, 0.21, 0.19, 0.0, 0.05, v0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_FaceScalarSolve);

}  // namespace

BENCHMARK_MAIN();
