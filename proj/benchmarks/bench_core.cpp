#include <benchmark/benchmark.h>

#include "hall_edge_lab/ed_oracle.hpp"
#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/response.hpp"
#include "hall_edge_lab/spectral.hpp"
#include "hall_edge_lab/topology.hpp"

using namespace hel;

namespace {
const HaldaneParams kTopo{1.0, 0.5, kPi / 2.0, 0.0};
}

static void BM_effective_1d_diag(benchmark::State& state) {
  const auto m = build_haldane(kTopo, static_cast<int>(state.range(0)), 0.0,
                               false, Boundary::CylinderDirichlet);
  double k1 = 0.0;
  for (auto _ : state) {
    Eigen::SelfAdjointEigenSolver<Mat> es(effective_1d_hamiltonian(m, k1));
    benchmark::DoNotOptimize(es.eigenvalues().sum());
    k1 += 1e-3;
  }
}
BENCHMARK(BM_effective_1d_diag)->Arg(20)->Arg(40)->Arg(80);

static void BM_band_structure_sweep(benchmark::State& state) {
  const auto m = build_haldane(kTopo, 24, 0.0, false,
                               Boundary::CylinderDirichlet);
  for (auto _ : state) {
    const auto branches = band_structure(m, KGrid::lattice(m));
    benchmark::DoNotOptimize(branches.size());
  }
}
BENCHMARK(BM_band_structure_sweep)->Unit(benchmark::kMillisecond);

static void BM_chern_number(benchmark::State& state) {
  const auto m = build_haldane(kTopo, 8, 0.0, false, Boundary::Torus);
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(chern_of_block(m, 0.0, grid));
  }
}
BENCHMARK(BM_chern_number)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_bubble_window(benchmark::State& state) {
  const auto m = build_haldane(kTopo, 40, 0.0, false,
                               Boundary::CylinderDirichlet);
  const auto wa = window_leq(40, 16);
  const auto wap = window_leq(40, 8);
  const KQuadrature quad = KQuadrature::lattice_grid(40);
  for (auto _ : state) {
    const cplx v = bubble_windowed(m, 0.0, 50.0, kTwoPi / 50.0, 0.3, 0, 0,
                                   Channel::Charge, wa, wap, quad);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_bubble_window)->Unit(benchmark::kMillisecond);

static void BM_schwinger_term(benchmark::State& state) {
  const auto m = build_haldane(kTopo, 40, 0.0, false,
                               Boundary::CylinderDirichlet);
  const KQuadrature quad = KQuadrature::lattice_grid(40);
  for (auto _ : state) {
    benchmark::DoNotOptimize(schwinger_term(m, 0.0, 50.0, 4, quad));
  }
}
BENCHMARK(BM_schwinger_term)->Unit(benchmark::kMillisecond);

static void BM_fock_build(benchmark::State& state) {
  const auto m = build_haldane(kTopo, 8, 0.0, false,
                               Boundary::CylinderDirichlet)
                     .with_interaction(onsite_interaction(2, 1.0));
  const int L2 = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto sys = FockSystem::build(m, 0.1, 2, L2, 8.0);
    benchmark::DoNotOptimize(sys.partition_rel());
  }
}
BENCHMARK(BM_fock_build)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
