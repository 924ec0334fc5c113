// Slab setup, assembly and solve on the expanding circle; range(0) is the level.

#include <benchmark/benchmark.h>

#include <memory>

#include "stcut/cases.hpp"
#include "stcut/forms.hpp"
#include "stcut/solver.hpp"

namespace {

using namespace stcut;

struct Slab {
  CaseDefinition c = expanding_circle_case();
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const SpatialDofTable> dofs;
  TimePartition partition{0.0, 1.0, 1};
  QuadratureConfig quad;
  std::unique_ptr<SlabSetup> setup;
  std::shared_ptr<const SlabSpace> space;
  int n = 0;

  Slab(int level, int k) {
    const auto [h, slabs] = c.schedule(level);
    mesh = std::make_shared<const Mesh>(build_structured_mesh(c.box, h));
    dofs = std::make_shared<const SpatialDofTable>(*mesh, k);
    partition = TimePartition(c.t0, c.t_end, slabs);
    quad = QuadratureConfig{}.resolved(k, k);
    n = slabs;  // last slab, the largest active set
    setup = std::make_unique<SlabSetup>(setup_slab(c.levelset, *mesh, partition, n, 1, quad));
    space = build_slab_space(dofs, setup->geometry, k, partition, n);
  }
};

void BM_SetupSlab(benchmark::State& state) {
  const Slab s(static_cast<int>(state.range(0)), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(setup_slab(s.c.levelset, *s.mesh, s.partition, s.n, 1, s.quad));
}

void BM_AssembleTransport(benchmark::State& state) {
  const Slab s(static_cast<int>(state.range(0)), 2);
  const TransportData data = s.c.transport_data();
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_Bh(*s.space, s.setup->geometry, s.setup->levelset, data, s.quad));
  state.counters["unknowns"] = s.space->num_unknowns();
}

void BM_AssembleGhostPenalty(benchmark::State& state) {
  const Slab s(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_J(*s.space, s.setup->geometry, 0.05));
  state.counters["facets"] = static_cast<double>(s.setup->geometry.ghost_facets.size());
}

void BM_SolveSlab(benchmark::State& state) {
  const Slab s(static_cast<int>(state.range(0)), 2);
  const TransportData data = s.c.transport_data();
  SlabSystem sys;
  sys.matrix = assemble_Bh(*s.space, s.setup->geometry, s.setup->levelset, data, s.quad) +
               assemble_J(*s.space, s.setup->geometry, 0.05);
  sys.rhs = Eigen::VectorXd::Ones(sys.matrix.rows());
  sys.slab = s.n;
  for (auto _ : state) benchmark::DoNotOptimize(solve_slab(sys));
  state.counters["unknowns"] = static_cast<double>(sys.matrix.rows());
}

BENCHMARK(BM_SetupSlab)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleTransport)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleGhostPenalty)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveSlab)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
