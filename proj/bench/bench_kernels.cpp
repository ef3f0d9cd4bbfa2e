// Serial reference kernels against their OpenMP versions, plus the full
// factor-and-respond step they feed. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include <random>

#include "nanoqed/kernels.hpp"
#include "nanoqed/spectrum.hpp"

namespace {

using namespace nanoqed;

std::vector<Vec3> cloud_positions(int n) {
  std::mt19937_64 rng(42);
  const double side = std::cbrt(n / 10.0);
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Vec3> p;
  for (int i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng), u(rng));
  return p;
}

template <auto Fill>
void medium_block(benchmark::State& state) {
  const auto pts = cloud_positions(static_cast<int>(state.range(0)));
  Eigen::MatrixXcd A(3 * pts.size(), 3 * pts.size());
  for (auto _ : state) {
    Fill(pts, 0.75, cplx(-117.0, 0.0), A);
    benchmark::DoNotOptimize(A.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size() * pts.size()));
}

template <auto Fill>
void coupling_block(benchmark::State& state) {
  const auto pts = cloud_positions(static_cast<int>(state.range(0)));
  std::vector<Vec3> atoms;
  for (int i = 0; i < 24; ++i) atoms.emplace_back(-1.0 - 0.2 * i, 0.3, 0.1);
  Eigen::MatrixXcd K(3 * pts.size(), 3 * atoms.size());
  for (auto _ : state) {
    Fill(pts, std::sqrt(0.75), atoms, K);
    benchmark::DoNotOptimize(K.data());
  }
}

void factor_and_respond(benchmark::State& state) {
  DipoleCloud cloud;
  cloud.positions = cloud_positions(static_cast<int>(state.range(0)));
  cloud.model.n0 = 10;
  cloud.model.delta_M = 117;
  const std::vector<Vec3> atoms{Vec3(-1.5, 0.2, 0.3)};
  for (auto _ : state) {
    const MediumResolvent res(cloud, false);
    benchmark::DoNotOptimize(res.response(atoms));
  }
}

}  // namespace

BENCHMARK(medium_block<kernels::fill_medium_block_serial>)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(medium_block<kernels::fill_medium_block>)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(coupling_block<kernels::fill_coupling_block_serial>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(coupling_block<kernels::fill_coupling_block>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(factor_and_respond)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
