#include <benchmark/benchmark.h>

#include "qot/dynamics.hpp"
#include "qot/pseudometric.hpp"
#include "qot/rng.hpp"
#include "qot/wasserstein.hpp"

namespace {

using namespace qot;

void BM_HermitianEig(benchmark::State& state) {
  int n = int(state.range(0));
  CounterRng rng(1, 0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Cd(rng.next_gaussian(), rng.next_gaussian());
  Mat h = hermitize(g);
  for (auto _ : state) {
    HermitianEig eig = hermitian_eig(h);
    benchmark::DoNotOptimize(eig.values.sum());
  }
}
BENCHMARK(BM_HermitianEig)->Arg(64)->Arg(144)->Arg(256)->Arg(400);

void BM_DdQqSelfDistance(benchmark::State& state) {
  int n = int(state.range(0));
  FockBasis basis = build_basis(0.5, n);
  DensityOperator tf = toeplitz_op(basis, two_point(-0.4, 0, 0.5, 0.4, 0, 0.5));
  SolverOptions opt;
  opt.tol = 1e-4;  // benchmark the iteration cost, not full convergence
  opt.max_iterations = 200;
  for (auto _ : state) {
    TransportResult t = dd_qq(basis, tf, tf, 1.0, opt);
    benchmark::DoNotOptimize(t.value);
  }
}
BENCHMARK(BM_DdQqSelfDistance)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TransportationSimplex(benchmark::State& state) {
  int n = int(state.range(0));
  CounterRng rng(7, 0);
  PhaseMeasure mu, nu;
  for (int i = 0; i < n; ++i) {
    mu.points.push_back({rng.next_gaussian(), rng.next_gaussian()});
    mu.weights.push_back(1.0 / n);
    nu.points.push_back({0.5 + rng.next_gaussian(), rng.next_gaussian()});
    nu.weights.push_back(1.0 / n);
  }
  for (auto _ : state) {
    W2Result w = w2_discrete(mu, nu);
    benchmark::DoNotOptimize(w.w2);
  }
}
BENCHMARK(BM_TransportationSimplex)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SplitStepStrang(benchmark::State& state) {
  FockBasis basis = build_basis(0.1, 16);
  PositionGrid grid = default_grid(basis, int(state.range(0)));
  SplitStep step(basis, grid, cosine_potential(0.5, 1.0));
  Vec psi(grid.m_points);
  for (int i = 0; i < grid.m_points; ++i)
    psi(i) = coherent_wavefunction(0.1, 0.3, 0.2, grid.points(i));
  for (auto _ : state) {
    step.strang_step(psi, 1e-3);
    benchmark::DoNotOptimize(psi(0));
  }
}
BENCHMARK(BM_SplitStepStrang)->Arg(256)->Arg(512)->Arg(1024);

void BM_WignerTransform(benchmark::State& state) {
  FockBasis basis = build_basis(0.5, 16);
  DensityOperator mix = toeplitz_op(basis, two_point(-0.4, 0.1, 0.5, 0.5, -0.2, 0.5));
  PhaseGrid grid = make_phase_grid(0, 0, 3.0, int(state.range(0)));
  for (auto _ : state) {
    PhaseFunction w = wigner(basis, mix, grid);
    benchmark::DoNotOptimize(w.values(0, 0));
  }
}
BENCHMARK(BM_WignerTransform)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
