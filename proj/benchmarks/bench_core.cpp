#include <benchmark/benchmark.h>

#include "aeelab/error_lab.hpp"
#include "aeelab/integrators.hpp"

namespace {

using namespace aeelab;

ModelSpec sine_model(std::size_t n) {
  SpectralOperator op = make_dirichlet_laplacian(n);
  NoiseSpec noise = NoiseSpec::from_decay(op, 2.0);
  AssumptionParams params;
  return ModelSpec{std::move(op), Nonlinearity::sine(1.0), std::move(noise), params, 1.0,
                   SpectralField::basis_vector(n, 0)};
}

void BM_SineTransform(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto& tf = SineTransform::shared(n);
  std::vector<double> coeff(n, 0.5), values(n);
  for (auto _ : state) {
    tf.to_physical(coeff, values);
    tf.to_spectral(values, coeff);
    benchmark::DoNotOptimize(coeff.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_SineTransform)->Arg(16)->Arg(64)->Arg(256);

void BM_BuildNoiseTable(benchmark::State& state) {
  const std::size_t n = 64;
  const ModelSpec model = sine_model(n);
  const GridSpec grid{1.0, static_cast<std::size_t>(state.range(0)), 64};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    NoiseTable t = build_noise_table(grid, model.noise, model.op, 99, stream++);
    benchmark::DoNotOptimize(t.db.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n * grid.fine_steps()));
}
BENCHMARK(BM_BuildNoiseTable)->Arg(16)->Arg(128);

void BM_ReferenceSolve(benchmark::State& state) {
  const std::size_t n = 64;
  const ModelSpec model = sine_model(n);
  const GridSpec grid{1.0, static_cast<std::size_t>(state.range(0)), 64};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 7, 0);
  for (auto _ : state) {
    Trajectory t = reference_solve(model, grid, table);
    benchmark::DoNotOptimize(t.terminal().coeff.data());
  }
}
BENCHMARK(BM_ReferenceSolve)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LimitSolve(benchmark::State& state) {
  const std::size_t n = 64;
  const ModelSpec model = sine_model(n);
  const GridSpec grid{1.0, static_cast<std::size_t>(state.range(0)), 64};
  const NoiseTable w = build_noise_table(grid, model.noise, model.op, 7, 0);
  const NoiseTable wt = build_independent_copy(grid, model.noise, model.op, 7, 0);
  const Trajectory ref = reference_solve(model, grid, w);
  for (auto _ : state) {
    Trajectory u = limit_u_solve(model, grid, w, wt, ref);
    benchmark::DoNotOptimize(u.terminal().coeff.data());
  }
}
BENCHMARK(BM_LimitSolve)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TwoSampleKs(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  const std::uint64_t key = rng::stream_key(1, 2, 3);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng::to_unit(rng::at(key, 2 * i));
    b[i] = rng::to_unit(rng::at(key, 2 * i + 1));
  }
  for (auto _ : state) {
    KsResult r = two_sample_ks(a, b);
    benchmark::DoNotOptimize(r.d);
  }
}
BENCHMARK(BM_TwoSampleKs)->Arg(2000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
