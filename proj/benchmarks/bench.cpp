#include <benchmark/benchmark.h>

#include "ymlab/density.hpp"
#include "ymlab/field.hpp"
#include "ymlab/flow.hpp"
#include "ymlab/grid.hpp"
#include "ymlab/parallel.hpp"

namespace {

using namespace ymlab;

LieField bump_field(int extent, int n) {
  Grid g({extent, extent, extent}, 1.0 / extent);
  InitialData d;
  d.kind = "random_bump";
  d.n = n;
  d.amplitude = 0.5;
  d.traceless = n > 1;
  d.seed = 3;
  return make_initial(g, d);
}

void bm_curvature(benchmark::State& state) {
  set_workers(1);
  const LieField a = bump_field(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(curvature(a));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(a.grid.volume()));
}
BENCHMARK(bm_curvature)->Arg(16)->Arg(32);

void bm_flow_rhs(benchmark::State& state) {
  set_workers(1);
  const LieField a = bump_field(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(flow_rhs(a));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(a.grid.volume()));
}
BENCHMARK(bm_flow_rhs)->Arg(16)->Arg(32);

void bm_rk4_step(benchmark::State& state) {
  set_workers(1);
  const LieField a = bump_field(static_cast<int>(state.range(0)), 2);
  FlowParams p;
  const double h = a.grid.spacing();
  p.dt = 0.1 * h * h;
  p.horizon = *p.dt;  // exactly one step
  for (auto _ : state) benchmark::DoNotOptimize(run_flow(a, p));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(a.grid.volume()));
}
BENCHMARK(bm_rk4_step)->Arg(16)->Arg(32);

void bm_theta_probe(benchmark::State& state) {
  set_workers(1);
  const LieField a = bump_field(48, 1);
  const ScalarField e = energy_density(curvature(a));
  const double h = a.grid.spacing();  // truncation ball 16 rho must stay
  const std::vector<double> z(3, 0.5);
  const double rho = state.range(0) * h;  // inside the period of 48 h
  for (auto _ : state) benchmark::DoNotOptimize(theta(e, z, rho));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_theta_probe)->Arg(1)->Arg(2);

void bm_theta_grid(benchmark::State& state) {
  set_workers(1);
  const LieField a = bump_field(static_cast<int>(state.range(0)), 1);
  const ScalarField e = energy_density(curvature(a));
  const double rho = 1.5 * a.grid.spacing();
  for (auto _ : state) benchmark::DoNotOptimize(theta_grid(e, rho));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(a.grid.volume()));
}
BENCHMARK(bm_theta_grid)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
