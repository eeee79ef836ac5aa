#include <benchmark/benchmark.h>

#include "cpd/assembly.hpp"
#include "cpd/geometry.hpp"

namespace {

cpd::PointCloud cube(double h) {
  return cpd::generate_uniform_grid(cpd::Box{cpd::Vec3::Zero(), cpd::Vec3::Ones()}, {}, h, 3);
}

cpd::NeighborTable table(const cpd::PointCloud& c, double horizon, cpd::InteractionFlags f) {
  cpd::NeighborOptions o;
  o.horizon = horizon;
  o.enabled = f;
  return cpd::make_neighbor_table(c, o);
}

void BM_NeighborSearch(benchmark::State& state) {
  const auto c = cube(1.0 / static_cast<double>(state.range(0)));
  const double horizon = 3.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cpd::find_neighbors(c.positions, horizon));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}
BENCHMARK(BM_NeighborSearch)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// Residual plus tangent at a stretched state; arg 1 selects the interactions.
void BM_Assemble(benchmark::State& state) {
  const auto c = cube(0.125);
  const cpd::InteractionFlags f{true, state.range(1) >= 2, state.range(1) >= 3};
  const auto t = table(c, 0.25, f);
  cpd::Material m{1.0, f.two ? 1.0 : 0.0, f.three ? 1.0 : 0.0, 0.25, f};
  std::vector<cpd::Vec3> x = c.positions;
  for (auto& p : x) p.x() *= 1.01;
  const cpd::AssemblyOptions opt{state.range(0) == 0 ? cpd::AssemblyMode::variational : cpd::AssemblyMode::collocation,
                                 cpd::Enumeration::unordered};
  cpd::AssembledSystem sys;
  for (auto _ : state) {
    cpd::assemble(c, t, x, m, opt, true, sys);
    benchmark::DoNotOptimize(sys.R.data());
  }
}
BENCHMARK(BM_Assemble)
    ->ArgsProduct({{0, 1}, {1, 2, 3}})
    ->ArgNames({"collocation", "kinds"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
