#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "msk/driver.hpp"
#include "msk/fixtures.hpp"
#include "msk/forward_selection.hpp"
#include "msk/kernel.hpp"
#include "msk/model.hpp"

namespace {

msk::Dataset sine_grid(Eigen::Index n) {
  msk::Dataset ds;
  ds.locations.resize(n, 1);
  ds.observations.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    ds.locations(i, 0) = x;
    ds.observations(i) = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * x);
  }
  return ds;
}

void BM_KernelColumn(benchmark::State& state) {
  const msk::Dataset ds = sine_grid(state.range(0));
  const double T = msk::normalizing_constant(ds.locations);
  const double kappa = msk::length_scale(T, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        msk::kernel_column(ds.locations, ds.locations.row(7), kappa));
  }
}
BENCHMARK(BM_KernelColumn)->Arg(256)->Arg(1024)->Arg(4096);

void BM_PairwiseDistances(benchmark::State& state) {
  const msk::Dataset ds = sine_grid(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(msk::pairwise_squared_distances(ds.locations));
  }
}
BENCHMARK(BM_PairwiseDistances)->Arg(256)->Arg(1024);

void BM_ForwardSelect(benchmark::State& state) {
  const msk::Dataset ds = sine_grid(state.range(0));
  const double T = msk::normalizing_constant(ds.locations);
  const auto d2 = msk::pairwise_squared_distances(ds.locations);
  const msk::ScaleColumns cols(ds.locations, msk::length_scale(T, 5), d2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        msk::forward_select(1e-3, cols, 5, ds.observations));
  }
}
BENCHMARK(BM_ForwardSelect)->Arg(256)->Arg(1024);

void BM_FitSchwefel1d(benchmark::State& state) {
  const msk::Dataset ds = msk::generate({msk::FixtureName::schwefel1d, 200, 0.0, 0});
  msk::DriverConfig cfg;
  cfg.omega = static_cast<int>(state.range(0));
  cfg.delta = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(msk::fit(ds, msk::identity_norm(1), cfg));
  }
}
BENCHMARK(BM_FitSchwefel1d)->Arg(5)->Arg(10);

void BM_Predict(benchmark::State& state) {
  const msk::Dataset ds = msk::generate({msk::FixtureName::schwefel1d, 200, 0.0, 0});
  msk::DriverConfig cfg;
  cfg.omega = 10;
  cfg.delta = 1e-3;
  const msk::FitResult res = msk::fit(ds, msk::identity_norm(1), cfg);
  Eigen::MatrixXd grid(state.range(0), 1);
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    grid(i, 0) = static_cast<double>(i) / static_cast<double>(grid.rows() - 1);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(msk::predict_normalized(res.model, grid));
  }
}
BENCHMARK(BM_Predict)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
