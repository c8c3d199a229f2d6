// Serial reference vs OpenMP kernels. Thread count follows HETLAB_THREADS.

#include <benchmark/benchmark.h>

#include "hetlab/manifolds.hpp"
#include "hetlab/polygon.hpp"
#include "hetlab/tangency.hpp"

using namespace hetlab;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

CycleSpec triangle_spec() {
  std::vector<NodeSpec> nodes{{1.0, 2.0, Vec3(1, 0, 0)}, {1.0, 3.0, Vec3(-0.5, 0.8660254037844386, 0)},
                              {1.0, 2.5, Vec3(-0.5, -0.8660254037844386, 0)}};
  return CycleSpec::validated(nodes, 0.1);
}

void BM_Hausdorff(benchmark::State& st) {
  const auto spec = triangle_spec();
  const auto poly = polygon_vertices(spec);
  const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 3 * 41 + 1);
  const auto tr = average_trace(it, spec, {100, Spacing::ArcUniform, true});
  const auto tail = trace_tail(tr, 3, 20, 40);
  for (auto _ : st) benchmark::DoNotOptimize(accumulation_distance(tail, poly, exec_of(st)));
}
BENCHMARK(BM_Hausdorff)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TangencyScan(benchmark::State& st) {
  const SineFamily fam;
  ScanOptions opts;
  opts.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(tangency_scan(fam, {1.0, 2.0, 0.1}, opts).tangencies.size());
}
BENCHMARK(BM_TangencyScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ManifoldRing(benchmark::State& st) {
  const ode::System sys(ode::SystemId::LiftedPerturbed, {0.05, 0.01, {1.0, 0.0, 1.5}});
  ManifoldOptions opts;
  opts.ring_size = 32;
  opts.exec = exec_of(st);
  const auto orbits = lifted_orbits(sys, opts.orbit);
  for (auto _ : st) benchmark::DoNotOptimize(trace_connection(sys, 0, orbits, opts).unstable_in.rho.size());
}
BENCHMARK(BM_ManifoldRing)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
