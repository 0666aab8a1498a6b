#include <benchmark/benchmark.h>

#include "blochctl/costs.hpp"
#include "blochctl/dynamics.hpp"
#include "blochctl/oracle.hpp"
#include "blochctl/pulses.hpp"

using namespace bloch;

namespace {

const UnitAxis kAxis(Vec3::unit_y());

void BM_PropagateClosedForm(benchmark::State& state) {
  const ParabolicPulse p(2.0, 0);
  const auto field = [&](double t) { return ControlVector(kAxis.vec() * p.value(t)); };
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = propagate(Vec3::unit_z(), field, n);
    benchmark::DoNotOptimize(r.final_state);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PropagateClosedForm)->Range(256, 4096);

void BM_PropagateSchedule(benchmark::State& state) {
  const CoshPulse p(2.0, 0, 5.0);
  const int n = static_cast<int>(state.range(0));
  const auto sched = sample_schedule(p, kAxis, n);
  for (auto _ : state) {
    auto r = propagate(Vec3::unit_z(), sched, std::nullopt);
    benchmark::DoNotOptimize(r.final_state);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PropagateSchedule)->Range(256, 4096);

void BM_CoshEval(benchmark::State& state) {
  const CoshPulse p(2.5, 1, 50.0);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-4;
    if (t > 1.0) t -= 1.0;
    benchmark::DoNotOptimize(p.value(t));
  }
}
BENCHMARK(BM_CoshEval);

void BM_ConstantNormControl(benchmark::State& state) {
  const ConstantNormField cn(Vec3::unit_z(), Vec3::unit_x(), 1.0);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-4;
    if (t > 1.0) t -= 1.0;
    benchmark::DoNotOptimize(cn.control(t));
  }
}
BENCHMARK(BM_ConstantNormControl);

void BM_FluenceQuadrature(benchmark::State& state) {
  const CoshPulse p(2.0, 0, 5.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fluence(p, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_FluenceQuadrature)->Range(500, 8000);

void BM_OracleTrials(benchmark::State& state) {
  OracleSettings s;
  s.n_trials = 10;
  s.offaxis_trials = 0;
  s.grid_n = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_fluence_minimum(2.0, 0, s));
  }
  state.SetItemsProcessed(state.iterations() * s.n_trials);
}
BENCHMARK(BM_OracleTrials);

void BM_DiscreteMinimizer(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        direct_discrete_minimizer(Criterion::Mixed, 2.0, 0, 56, 1.0, 5.0));
  }
}
BENCHMARK(BM_DiscreteMinimizer);

}  // namespace

BENCHMARK_MAIN();
