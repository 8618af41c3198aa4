// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <memory>

#include "cvpc/galerkin.hpp"
#include "cvpc/models.hpp"
#include "cvpc/montecarlo.hpp"

namespace {

cvpc::Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? cvpc::Execution::Serial : cvpc::Execution::Parallel;
}

void BM_SampleQoi(benchmark::State& state) {
  const auto p = cvpc::lorenz_stable();
  const cvpc::QoiModel model(p.ode, p.qoi);
  const auto batch = cvpc::SampleBatch::draw(1, static_cast<std::size_t>(state.range(1)), 3);
  const auto grid = cvpc::TimeGrid::over(1.0, 1e-3);
  for (auto _ : state) {
    auto m = cvpc::sample_qoi(model, batch, grid, 100, mode(state));
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_SampleQoi)->ArgsProduct({{0, 1}, {64, 512}})->ArgNames({"parallel", "samples"})->Unit(benchmark::kMillisecond);

void BM_SampleSurrogate(benchmark::State& state) {
  const auto p = cvpc::lorenz_stable();
  const cvpc::QoiModel model(p.ode, p.qoi);
  auto basis = std::make_shared<const cvpc::MultiIndexBasis>(
      cvpc::MultiIndexBasis::build(3, 4, cvpc::ExpansionScheme::TotalOrder));
  const auto sys = cvpc::GalerkinSystem::project(model.system(), basis);
  const auto traj = cvpc::integrate(sys, cvpc::TimeGrid::over(1.0, 1e-3), 250);
  std::vector<cvpc::PcExpansion> e;
  for (std::size_t j = 0; j < traj.times.size(); ++j) e.push_back(model.expansion(sys, traj.states[j], traj.times[j]));
  const auto batch = cvpc::SampleBatch::draw(1, static_cast<std::size_t>(state.range(1)), 3);
  for (auto _ : state) {
    auto m = cvpc::sample_surrogate(e, batch, mode(state));
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_SampleSurrogate)->ArgsProduct({{0, 1}, {10000, 100000}})->ArgNames({"parallel", "samples"})->Unit(benchmark::kMillisecond);

void BM_GalerkinRhs(benchmark::State& state) {
  const auto p = cvpc::lorenz_stable();
  const cvpc::QoiModel model(p.ode, p.qoi);
  auto basis = std::make_shared<const cvpc::MultiIndexBasis>(
      cvpc::MultiIndexBasis::build(3, static_cast<unsigned>(state.range(0)), cvpc::ExpansionScheme::TotalOrder));
  const auto sys = cvpc::GalerkinSystem::project(model.system(), basis);
  std::vector<double> x = sys.initial_state(), dx(sys.size());
  for (auto _ : state) {
    sys.rhs(x, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_GalerkinRhs)->DenseRange(1, 6)->ArgName("degree");

}  // namespace

BENCHMARK_MAIN();
