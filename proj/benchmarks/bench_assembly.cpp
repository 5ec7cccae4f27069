#include <benchmark/benchmark.h>

#include "avem/data_approximation.hpp"
#include "avem/error_estimator.hpp"
#include "avem/problems.hpp"
#include "avem/vem_assembly.hpp"

namespace {

struct Fixture {
  avem::MeshForest mesh;
  avem::PiecewiseConstantData data;
  avem::ProblemData problem;

  explicit Fixture(int rounds) : mesh(avem::make_lshape_mesh(0.25)) {
    const auto spec = avem::build_lshape_problem(0.25);
    problem = spec.data;
    for (int i = 0; i < rounds; ++i) mesh.refine(mesh.alive_elements(), 10);
    data = avem::project_data(mesh, problem);
  }
};

void BM_assemble(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(avem::assemble(fix.mesh, fix.data, 1.0, fix.problem.dirichlet));
  }
  state.SetLabel(std::to_string(fix.mesh.num_alive()) + " elements");
}
BENCHMARK(BM_assemble)->Arg(1)->Arg(2);

void BM_estimate(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  const auto sys = avem::assemble(fix.mesh, fix.data, 1.0, fix.problem.dirichlet);
  const auto dofs = avem::solve_system(sys);
  const auto proj = avem::project_solution(fix.mesh, dofs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(avem::estimate(fix.mesh, fix.data, proj).total);
  }
  state.SetLabel(std::to_string(fix.mesh.num_alive()) + " elements");
}
BENCHMARK(BM_estimate)->Arg(1)->Arg(2);

void BM_project_data(benchmark::State& state) {
  const Fixture fix(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(avem::project_data(fix.mesh, fix.problem).values.size());
  }
}
BENCHMARK(BM_project_data);

}  // namespace
