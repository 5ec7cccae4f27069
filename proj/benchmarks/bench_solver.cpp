#include <benchmark/benchmark.h>

#include "avem/data_approximation.hpp"
#include "avem/problems.hpp"
#include "avem/vem_assembly.hpp"

namespace {

void BM_pcg_solve(benchmark::State& state) {
  auto mesh = avem::make_lshape_mesh(0.25);
  const auto spec = avem::build_lshape_problem(0.25);
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    mesh.refine(mesh.alive_elements(), 10);
  }
  const auto data = avem::project_data(mesh, spec.data);
  const auto sys = avem::assemble(mesh, data, 1.0, spec.data.dirichlet);
  for (auto _ : state) {
    avem::SolveStats stats;
    benchmark::DoNotOptimize(avem::solve_system(sys, {}, &stats));
    state.counters["iterations"] = stats.iterations;
  }
  state.SetLabel(std::to_string(sys.matrix.n) + " unknowns");
}
BENCHMARK(BM_pcg_solve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
