#include "cblab/operators.hpp"
#include "cblab/resolvent.hpp"
#include "cblab/rng.hpp"
#include "cblab/semigroup.hpp"
#include "cblab/simulation.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cblab;

void BM_BuildGrid(benchmark::State& state) {
  const int n = int(state.range(0));
  for (auto _ : state) {
    ChebGrid g = build_grid(n);
    benchmark::DoNotOptimize(g.d2.data());
  }
}
BENCHMARK(BM_BuildGrid)->Arg(64)->Arg(128)->Arg(256);

void BM_ApplyD1(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  Rng rng(1);
  Vec f(g.n);
  for (int j = 0; j < g.n; ++j) f[j] = Complex(rng.normal(), rng.normal());
  Vec out(g.n);
  for (auto _ : state) {
    out.noalias() = g.d1.cast<Complex>() * f;
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ApplyD1)->Arg(64)->Arg(128);

void BM_SolveHelmholtz(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  Rng rng(2);
  Vec f(g.n);
  for (int j = 0; j < g.n; ++j) f[j] = Complex(rng.normal(), rng.normal());
  ModeField rhs{2, f};
  for (auto _ : state) {
    ModeField u = solve_helmholtz(g, 2, rhs);
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_SolveHelmholtz)->Arg(64)->Arg(128);

void BM_SolveResolvent(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  ModeOperator op = assemble_mode_operator(g, 2, FluidParams{1e-3, 1e-3},
                                           OperatorKind::temperature);
  Rng rng(3);
  Vec f(g.n);
  for (int j = 0; j < g.n; ++j) f[j] = Complex(rng.normal(), rng.normal());
  ModeField rhs{2, f};
  for (auto _ : state) {
    ModeField theta = solve_resolvent(op, 0.3, rhs);
    benchmark::DoNotOptimize(theta.values.data());
  }
}
BENCHMARK(BM_SolveResolvent)->Arg(64)->Arg(128);

void BM_GearhartPrussGap(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  ModeOperator op = assemble_mode_operator(g, 1, FluidParams{1e-3, 1e-3},
                                           OperatorKind::temperature);
  for (auto _ : state) {
    double gap = gearhart_pruss_gap(op, {0.0, 0.5});
    benchmark::DoNotOptimize(gap);
  }
}
BENCHMARK(BM_GearhartPrussGap)->Arg(64)->Arg(96);

void BM_TemperatureStep(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  TemperatureStepper stepper(g, 2, 1e-3, 1e-2);
  Rng rng(4);
  Vec theta(g.n);
  for (int j = 1; j < g.n - 1; ++j)
    theta[j] = Complex(rng.normal(), rng.normal());
  theta[0] = theta[g.n - 1] = 0.0;
  for (auto _ : state) {
    theta = stepper.step(theta, Vec());
    benchmark::DoNotOptimize(theta.data());
  }
}
BENCHMARK(BM_TemperatureStep)->Arg(64)->Arg(128);

ChannelState bench_state(const ChebGrid& g, int k_max) {
  ChannelState s = ChannelState::zero(g, k_max);
  Rng rng(5);
  for (int k = 1; k <= k_max; ++k) {
    Vec psi(g.n);
    for (int j = 0; j < g.n; ++j) {
      const double y = g.nodes[j];
      psi[j] = Complex(rng.normal(), rng.normal()) * std::pow(1 - y * y, 2);
    }
    psi *= 1e-3 / std::pow(2.0, k);
    s.omega[k] = g.d2.cast<Complex>() * psi - double(k) * double(k) * psi;
    Velocity v = velocity_from_vorticity(g, k, {k, s.omega[k]});
    s.u1[k] = v.u1.values;
    s.u2[k] = v.u2.values;
    s.theta[k] = 1e-3 * psi;
  }
  return s;
}

void BM_ComputeFluxes(benchmark::State& state) {
  ChebGrid g = build_grid(int(state.range(0)));
  const int k_max = int(state.range(1));
  ChannelState s = bench_state(g, k_max);
  DealiasedTransform transform(g.n, k_max);
  for (auto _ : state) {
    NonlinearFluxes f = transform.fluxes(s);
    benchmark::DoNotOptimize(f.f1.data());
  }
}
BENCHMARK(BM_ComputeFluxes)->Args({64, 8})->Args({128, 16});

void BM_NonlinearStep(benchmark::State& state) {
  const int n = int(state.range(0));
  const int k_max = int(state.range(1));
  ChebGrid g = build_grid(n);
  RunConfig cfg;
  cfg.n = n;
  cfg.k_max = k_max;
  cfg.nu = 1e-3;
  cfg.mu = 1e-3;
  cfg.T = 1.0;
  cfg.dt = 1e-2;
  Simulator sim(g, cfg);
  sim.set_state(bench_state(g, k_max));
  for (auto _ : state) {
    auto r = sim.try_step();
    benchmark::DoNotOptimize(r.accepted);
  }
}
BENCHMARK(BM_NonlinearStep)->Args({64, 8})->Args({128, 16});

}  // namespace

BENCHMARK_MAIN();
