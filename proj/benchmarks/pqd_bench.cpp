#include <benchmark/benchmark.h>

#include <random>

#include "pqd/channel.hpp"
#include "pqd/decomposition.hpp"
#include "pqd/linalg.hpp"
#include "pqd/models.hpp"
#include "pqd/montecarlo.hpp"

using namespace pqd;

namespace {

RVector random_probabilities(std::mt19937_64& rng, Eigen::Index d) {
  std::exponential_distribution<double> e(1.0);
  RVector p(d);
  for (Eigen::Index i = 0; i < d; ++i) p(i) = e(rng);
  return p / p.sum();
}

void BM_CirculantSolve(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  const RVector p = random_probabilities(rng, d);
  RVector f = random_probabilities(rng, d) - p;
  for (auto _ : state) benchmark::DoNotOptimize(solve_circulant_rates(p, f, RateConvention::Continuous));
}
BENCHMARK(BM_CirculantSolve)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(64);

void BM_ToeplitzSolve(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(2);
  RVector p = random_probabilities(rng, n);
  std::sort(p.data(), p.data() + n, std::greater<>());
  RVector f = random_probabilities(rng, n) - p;
  for (auto _ : state) benchmark::DoNotOptimize(solve_toeplitz_rates(p, f, n));
}
BENCHMARK(BM_ToeplitzSolve)->Arg(8)->Arg(64);

void BM_DecomposeLindblad(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto gauss = [&] {
    CMatrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = Complex(g(rng), g(rng));
    return m;
  };
  const CMatrix a = gauss();
  LindbladSpec spec{0.5 * (a + a.adjoint()), {{gauss() / std::sqrt(static_cast<double>(d)), 0.5}}};
  RVector p(d);
  for (Eigen::Index i = 0; i < d; ++i) p(i) = static_cast<double>(d - i);
  p /= p.sum();
  const DensityMatrix rho0(CMatrix(p.cast<Complex>().asDiagonal()));
  const auto samples = integrate(spec, rho0, uniform_grid(1e-3, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(decompose_trajectory(samples));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_DecomposeLindblad)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EnsembleAmplitudeDamping(benchmark::State& state) {
  const double dt = 1e-3, horizon = 0.6;
  const auto samples = amplitude_damping_trajectory(1.0, 0.0, uniform_grid(dt, horizon));
  const auto dec = decompose_trajectory(samples);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble({dt, n, 42, horizon, 1}, dec, samples[0].rho, samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnsembleAmplitudeDamping)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ChannelDecomposition(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(4);
  auto diag_state = [&] {
    const RVector p = random_probabilities(rng, d);
    return DensityMatrix(CMatrix(p.cast<Complex>().asDiagonal()));
  };
  const DensityMatrix in = diag_state(), out = diag_state();
  for (auto _ : state) benchmark::DoNotOptimize(decompose_channel(in, out));
}
BENCHMARK(BM_ChannelDecomposition)->Arg(2)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
