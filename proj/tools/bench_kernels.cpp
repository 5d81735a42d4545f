#include <benchmark/benchmark.h>

#include <cmath>

#include "varifold_lab/kernels.hpp"
#include "varifold_lab/varifold.hpp"

using namespace vl;

namespace {

const DiscreteVarifold& catenoid() {
  static DiscreteVarifold V = make_catenoid_varifold(64.0, 512);
  return V;
}

void BM_Tilt(benchmark::State& st, ExecPolicy p) {
  set_exec_policy(p);
  const auto& V = catenoid();
  Region R = Region::ball({0, 0, 0}, 32.0);
  Plane T = Plane::coordinate(3, 2);
  for (auto _ : st) benchmark::DoNotOptimize(tilt_excess(V, R, T, 2.0));
  st.counters["atoms"] = static_cast<double>(V.atoms.size());
  st.counters["threads"] = p == ExecPolicy::Parallel ? parallel_threads() : 1;
}

void BM_Reduce(benchmark::State& st, ExecPolicy p) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(reduce_terms(n, [](std::size_t i) { return std::sin(1e-3 * i) / (1.0 + i); }, p));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Tilt, serial, ExecPolicy::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Tilt, parallel, ExecPolicy::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Reduce, serial, ExecPolicy::Serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Reduce, parallel, ExecPolicy::Parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
