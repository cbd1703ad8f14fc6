#include <benchmark/benchmark.h>

#include "critsys/blowup.hpp"

namespace {

using namespace critsys;

void bm_laplacian(benchmark::State& state) {
  const manifold_model m = sphere_model(4, static_cast<int>(state.range(0)));
  const field u = sphere_bubble_field(m, 1.5);
  for (auto _ : state) {
    field out = laplacian(m, u);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_laplacian)->Arg(1024)->Arg(4096)->Arg(16384);

void bm_functional_gradient(benchmark::State& state) {
  const manifold_model m = sphere_model(4, static_cast<int>(state.range(0)));
  const coupling A = yamabe_coupling(4, 2);
  pmap u = zero_map(2, m.N);
  u.comp[0] = sphere_bubble_field(m, 1.5);
  u.comp[1] = sphere_bubble_field(m, 2.0);
  for (auto _ : state) {
    pmap g = functional_gradient(m, u, A);
    benchmark::DoNotOptimize(g.comp[0].data());
  }
}
BENCHMARK(bm_functional_gradient)->Arg(1024)->Arg(4096);

void bm_minimize_scalar(benchmark::State& state) {
  const manifold_model m = sphere_model(4, static_cast<int>(state.range(0)));
  const coupling A = yamabe_coupling(4, 1);
  for (auto _ : state) {
    minimize_options opts;
    opts.record_history = false;
    solve_report rep = minimize_mu(m, A, opts);
    benchmark::DoNotOptimize(rep.value);
  }
}
BENCHMARK(bm_minimize_scalar)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void bm_family_diagnostics(benchmark::State& state) {
  const manifold_model m = sphere_model(4, 2048);
  const blowup_sequence seq = build_family("sphere_yamabe", m, {1.5, 1.2, 1.1});
  for (auto _ : state) {
    std::vector<blowup_row> rows = family_diagnostics(seq, 0.5);
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(bm_family_diagnostics)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
