#include <benchmark/benchmark.h>

#include <random>

#include "avem/mesh_forest.hpp"
#include "avem/problems.hpp"

namespace {

void BM_marked_refinement(benchmark::State& state) {
  const int lambda = static_cast<int>(state.range(0));
  for (auto _ : state) {
    std::mt19937 rng(99);
    auto mesh = avem::make_square_mesh(4);
    for (int step = 0; step < 200; ++step) {
      std::uniform_int_distribution<avem::ElementId> pick(0, mesh.num_elements() - 1);
      avem::ElementId e = pick(rng);
      while (!mesh.is_alive(e)) e = pick(rng);
      mesh.create_admissible_chain(e, lambda);
    }
    benchmark::DoNotOptimize(mesh.num_alive());
  }
}
BENCHMARK(BM_marked_refinement)->Arg(1)->Arg(3);

void BM_uniform_refinement(benchmark::State& state) {
  for (auto _ : state) {
    auto mesh = avem::make_square_mesh(4);
    for (int round = 0; round < 4; ++round) {
      mesh.refine(mesh.alive_elements(), avem::kLambdaUnbounded);
    }
    benchmark::DoNotOptimize(mesh.num_alive());
  }
}
BENCHMARK(BM_uniform_refinement);

void BM_overlay(benchmark::State& state) {
  std::mt19937 rng(7);
  auto a = avem::make_square_mesh(4);
  auto b = avem::make_square_mesh(4);
  for (int step = 0; step < 300; ++step) {
    std::uniform_int_distribution<avem::ElementId> pick_a(0, a.num_elements() - 1);
    avem::ElementId e = pick_a(rng);
    while (!a.is_alive(e)) e = pick_a(rng);
    a.create_admissible_chain(e, 2);
    std::uniform_int_distribution<avem::ElementId> pick_b(0, b.num_elements() - 1);
    e = pick_b(rng);
    while (!b.is_alive(e)) e = pick_b(rng);
    b.create_admissible_chain(e, 2);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(avem::MeshForest::overlay(a, b).num_alive());
  }
}
BENCHMARK(BM_overlay);

}  // namespace
