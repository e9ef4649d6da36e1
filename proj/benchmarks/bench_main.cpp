#include <benchmark/benchmark.h>

#include <random>

#include "sdcs/bem.hpp"
#include "sdcs/coding.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/recovery.hpp"
#include "sdcs/rng.hpp"

using namespace sdcs;

namespace {

// Equispaced J = 3 pattern with G clusters at the default numerology.
void BM_Bsomp(benchmark::State& state) {
  const SystemConfig cfg;
  const int G = static_cast<int>(state.range(0));
  const auto pattern = equispaced_pattern(cfg.n_subcarriers, cfg.n_symbols, cfg.bem_order, G,
                                          default_pilot_amplitude(cfg.bem_order));
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  const auto basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  const auto real = generate_channel(cfg, 3);
  TxFrame f = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
  embed_pilots(f, pattern);
  auto rng = make_rng(3, Stream::data);
  fill_random_data(f, rng);
  const auto y = decouple(transmit(f, real, 30.0, rng), pattern);
  for (auto _ : state) benchmark::DoNotOptimize(bsomp(y, phi, cfg.sparsity));
}
BENCHMARK(BM_Bsomp)->Arg(30)->Arg(60)->Arg(120)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_Somp(benchmark::State& state) {
  const SystemConfig cfg;
  const auto pattern = equispaced_pattern(cfg.n_subcarriers, cfg.n_symbols, cfg.bem_order, 60, 1.0);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  auto rng = make_rng(4, Stream::data);
  std::normal_distribution<double> n;
  DecoupledObservations y{CMatrix(60, cfg.bem_order)};
  for (Eigen::Index i = 0; i < y.values.size(); ++i) y.values.data()[i] = {n(rng), n(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(somp(y, phi, cfg.sparsity));
}
BENCHMARK(BM_Somp)->Unit(benchmark::kMillisecond);

void BM_PatternCoherence(benchmark::State& state) {
  const auto p = equispaced_pattern(512, 3, 3, 60, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(pattern_coherence(p.values, 512, 3, 64));
}
BENCHMARK(BM_PatternCoherence);

void BM_OptimizePattern(benchmark::State& state) {
  PatternSearch s;
  s.iterations = static_cast<int>(state.range(0));
  s.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_pattern(s, 1));
}
BENCHMARK(BM_OptimizePattern)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GenerateChannel(benchmark::State& state) {
  const SystemConfig cfg;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_channel(cfg, ++seed));
}
BENCHMARK(BM_GenerateChannel)->Unit(benchmark::kMillisecond);

void BM_Transmit(benchmark::State& state) {
  const SystemConfig cfg;
  const auto real = generate_channel(cfg, 1);
  TxFrame f = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
  auto rng = make_rng(1, Stream::data);
  fill_random_data(f, rng);
  for (auto _ : state) benchmark::DoNotOptimize(transmit(f, real, 20.0, rng));
}
BENCHMARK(BM_Transmit)->Unit(benchmark::kMillisecond);

void BM_BandedZf(benchmark::State& state) {
  const SystemConfig cfg;
  const auto real = generate_channel(cfg, 1);
  const auto basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  const auto coeffs = fit_coefficients(real, basis);
  const auto h = frequency_channel_band(coeffs, cfg.n_subcarriers, 0);
  const CVector y = CVector::Ones(cfg.n_subcarriers);
  for (auto _ : state) benchmark::DoNotOptimize(equalize_zf(h, y));
}
BENCHMARK(BM_BandedZf);

void BM_Viterbi(benchmark::State& state) {
  auto rng = make_rng(2, Stream::data);
  Bits info(static_cast<std::size_t>(state.range(0)));
  for (auto& b : info) b = static_cast<std::uint8_t>(rng() & 1U);
  const Bits coded = conv_encode(info);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(coded));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(1230)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
