#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "sdcs/bem.hpp"
#include "sdcs/eval.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/recovery.hpp"
#include "sdcs/rng.hpp"

using namespace sdcs;

namespace {

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.n_subcarriers = 128;
  cfg.cp_length = 16;
  cfg.delay_taps = 16;
  cfg.sparsity = 3;
  cfg.n_symbols = 3;
  cfg.bem_order = 3;
  return cfg;
}

PilotPattern designed(const SystemConfig& cfg, int clusters, std::uint64_t seed = 1) {
  PatternSearch s;
  s.n_subcarriers = cfg.n_subcarriers;
  s.n_symbols = cfg.n_symbols;
  s.order = cfg.bem_order;
  s.clusters = clusters;
  s.delay_taps = cfg.delay_taps;
  s.iterations = 300;
  s.restarts = 2;
  return optimize_pattern(s, seed).pattern;
}

// Random CE-BEM coefficients on a K-tap support, shared by all symbols.
BemCoefficients random_coefficients(const SystemConfig& cfg, std::mt19937_64& rng,
                                    std::vector<int>* support = nullptr) {
  std::vector<int> taps(cfg.delay_taps);
  std::iota(taps.begin(), taps.end(), 0);
  std::shuffle(taps.begin(), taps.end(), rng);
  taps.resize(cfg.sparsity);
  std::sort(taps.begin(), taps.end());
  BemCoefficients c(cfg.n_symbols, cfg.bem_order, cfg.delay_taps);
  for (int j = 0; j < cfg.n_symbols; ++j) {
    const CMatrix g = fixtures::gaussian(cfg.bem_order, cfg.sparsity, rng, 0.3);
    for (int k = 0; k < cfg.sparsity; ++k) c.c[j].col(taps[k]) = g.col(k);
  }
  if (support) *support = taps;
  return c;
}

// Column q of the observation matrix for the exact model.
MeasurementMatrix random_phi(int rows, int blocks, int block, std::mt19937_64& rng) {
  MeasurementMatrix m;
  m.phi = fixtures::gaussian(rows, blocks * block, rng);
  m.n_symbols = block;
  m.delay_taps = blocks;
  return m;
}

// Residual after projecting y onto the selected columns.
double residual(const CMatrix& y, const CMatrix& phi, const std::vector<int>& cols) {
  CMatrix sub(phi.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) sub.col(i) = phi.col(cols[i]);
  return (y - project_onto(sub, y)).norm();
}

}  // namespace

TEST(Decouple, ExactForExactBemChannelWithoutNoise) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  const BemBasis basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  auto rng = make_rng(2, Stream::coefficients);
  for (int t = 0; t < 5; ++t) {
    const auto coeffs = random_coefficients(cfg, rng);
    const auto real = synthesize_exact_bem_channel(coeffs, basis, cfg);
    TxFrame f = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
    embed_pilots(f, pattern);
    fill_random_data(f, rng);
    const RxFrame rx = transmit(f, real, kNoiseless, rng);
    const auto y = decouple(rx, pattern);
    const CMatrix expected = phi.phi * sparse_from_coefficients(coeffs);
    EXPECT_LT((y.values - expected).norm() / expected.norm(), 1e-12);
  }
}

TEST(Decouple, IndependentOfDataSymbols) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const BemBasis basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  auto rng = make_rng(4, Stream::coefficients);
  const auto real = synthesize_exact_bem_channel(random_coefficients(cfg, rng), basis, cfg);
  TxFrame a = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
  embed_pilots(a, pattern);
  TxFrame b = a;
  fill_random_data(a, rng);
  fill_random_data(b, rng);
  const auto ya = decouple(transmit(a, real, kNoiseless, rng), pattern);
  const auto yb = decouple(transmit(b, real, kNoiseless, rng), pattern);
  EXPECT_LT(fixtures::max_abs(ya.values - yb.values), 1e-12);
}

TEST(Decouple, ZeroChannelGivesZeroObservations) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  RxFrame rx;
  rx.symbols = CMatrix::Zero(cfg.n_symbols, cfg.n_subcarriers);
  const auto y = decouple(rx, pattern);
  EXPECT_EQ(y.values.rows(), 15);
  EXPECT_EQ(y.values.cols(), 3);
  EXPECT_EQ(fixtures::max_abs(y.values), 0.0);
}

TEST(Rearrange, HandWorkedPermutation) {
  // J = 2, L = 3: c-ordering rows j L + l, s-ordering rows l J + j
  CMatrix c(6, 1);
  c << 0, 1, 2, 10, 11, 12;  // value = 10 j + l
  const CMatrix s = rearrange_c_to_s(c, 2, 3);
  CMatrix expected(6, 1);
  expected << 0, 10, 1, 11, 2, 12;
  EXPECT_EQ(s, expected);
  EXPECT_EQ(rearrange_s_to_c(s, 2, 3), c);
}

TEST(Rearrange, RoundTripAndSingleSymbolIdentity) {
  auto rng = make_rng(5, Stream::coefficients);
  const CMatrix x = fixtures::gaussian(3 * 7, 3, rng);
  EXPECT_EQ(rearrange_s_to_c(rearrange_c_to_s(x, 3, 7), 3, 7), x);
  EXPECT_EQ(rearrange_c_to_s(rearrange_s_to_c(x, 3, 7), 3, 7), x);
  const CMatrix one = fixtures::gaussian(9, 2, rng);
  EXPECT_EQ(rearrange_c_to_s(one, 1, 9), one);
  EXPECT_THROW(rearrange_c_to_s(one, 2, 9), std::invalid_argument);
}

TEST(Projection, Idempotent) {
  auto rng = make_rng(6, Stream::coefficients);
  const CMatrix a = fixtures::gaussian(12, 4, rng);
  const CMatrix r = fixtures::gaussian(12, 3, rng);
  const CMatrix p = project_onto(a, r);
  EXPECT_LT(fixtures::max_abs(project_onto(a, p) - p), 1e-12);
  // residual orthogonal to the range
  EXPECT_LT(fixtures::max_abs(a.adjoint() * (r - p)), 1e-12);
}

TEST(BlockPursuit, RecoversPlantedBlockSupport) {
  auto rng = make_rng(7, Stream::coefficients);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_phi(40, 16, 3, rng);
    std::vector<int> blocks(16);
    std::iota(blocks.begin(), blocks.end(), 0);
    std::shuffle(blocks.begin(), blocks.end(), rng);
    blocks.resize(3);
    CMatrix s = CMatrix::Zero(48, 3);
    for (int b : blocks) s.middleRows(b * 3, 3) = fixtures::gaussian(3, 3, rng);
    const auto y = (m.phi * s).eval();
    const auto r = block_pursuit(y, m.phi, 3, 3);
    std::vector<int> got = r.selected;
    std::sort(got.begin(), got.end());
    std::sort(blocks.begin(), blocks.end());
    EXPECT_EQ(got, blocks);
    EXPECT_LT((r.coefficients - s).norm() / s.norm(), 1e-10);
  }
}

TEST(BlockPursuit, TwoIterationsMatchBruteForceGreedySteps) {
  // Oracle: each step takes the block whose own projection leaves the least
  // of the current residual; the final residual is the joint LS residual.
  auto rng = make_rng(8, Stream::coefficients);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_phi(10, 8, 2, rng);
    const CMatrix y = fixtures::gaussian(10, 3, rng);
    auto cols_of = [](std::vector<int> blocks) {
      std::vector<int> cols;
      for (int b : blocks) cols.insert(cols.end(), {2 * b, 2 * b + 1});
      return cols;
    };
    int first = 0;
    for (int b = 1; b < 8; ++b)
      if (residual(y, m.phi, cols_of({b})) < residual(y, m.phi, cols_of({first}))) first = b;
    const CMatrix sub = m.phi.middleCols(2 * first, 2);
    const CMatrix r1 = y - project_onto(sub, y);
    int second = -1;
    for (int b = 0; b < 8; ++b) {
      if (b == first) continue;
      if (second < 0 || residual(r1, m.phi, cols_of({b})) < residual(r1, m.phi, cols_of({second}))) second = b;
    }
    const auto r = block_pursuit(y, m.phi, 2, 2);
    EXPECT_EQ(r.selected, (std::vector<int>{first, second}));
    EXPECT_NEAR(r.residual_norms.back(), residual(y, m.phi, cols_of({first, second})), 1e-10);
  }
}

TEST(BlockPursuit, BestPairUnderFullSearchWhenPlanted) {
  // C(8, 2) exhaustive: with a planted noise-free pair the greedy result is the global optimum.
  auto rng = make_rng(9, Stream::coefficients);
  const auto m = random_phi(12, 8, 2, rng);
  CMatrix s = CMatrix::Zero(16, 2);
  s.middleRows(2, 2) = fixtures::gaussian(2, 2, rng);
  s.middleRows(10, 2) = fixtures::gaussian(2, 2, rng);
  const CMatrix y = m.phi * s;
  double best = INFINITY;
  std::vector<int> arg;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) {
      const double e = residual(y, m.phi, {2 * a, 2 * a + 1, 2 * b, 2 * b + 1});
      if (e < best) best = e, arg = {a, b};
    }
  auto got = block_pursuit(y, m.phi, 2, 2).selected;
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, arg);
  EXPECT_EQ(arg, (std::vector<int>{1, 5}));
}

TEST(BlockPursuit, ResidualNeverIncreases) {
  auto rng = make_rng(10, Stream::coefficients);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_phi(30, 20, 3, rng);
    const CMatrix y = fixtures::gaussian(30, 3, rng);
    const auto r = block_pursuit(y, m.phi, 3, 6);
    ASSERT_EQ(r.residual_norms.size(), 7u);
    EXPECT_NEAR(r.residual_norms.front(), y.norm(), 1e-12);
    for (std::size_t i = 1; i < r.residual_norms.size(); ++i)
      EXPECT_LE(r.residual_norms[i], r.residual_norms[i - 1] + 1e-12);
  }
}

TEST(BlockPursuit, TooManyIterationsRejected) {
  auto rng = make_rng(11, Stream::coefficients);
  const auto m = random_phi(12, 4, 3, rng);
  const CMatrix y = fixtures::gaussian(12, 1, rng);
  EXPECT_THROW(block_pursuit(y, m.phi, 3, 5), std::invalid_argument);
}

TEST(BlockPursuit, RankLossNamesTheIteration) {
  auto rng = make_rng(12, Stream::coefficients);
  // block 1 duplicates block 0, so the second pick cannot keep full rank
  auto m = random_phi(10, 2, 2, rng);
  m.phi.rightCols(2) = m.phi.leftCols(2);
  const CMatrix y = fixtures::gaussian(10, 1, rng);
  try {
    block_pursuit(y, m.phi, 2, 2);
    FAIL() << "expected rank deficiency";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.iteration(), 1);
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(Bsomp, SingleSymbolEqualsSomp) {
  auto rng = make_rng(13, Stream::coefficients);
  for (int t = 0; t < 20; ++t) {
    auto m = random_phi(24, 16, 1, rng);
    const DecoupledObservations y{fixtures::gaussian(24, 3, rng)};
    const auto a = bsomp(y, m, 4);
    const auto b = somp(y, m, 4);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.support, b.support);
    EXPECT_LT(fixtures::max_abs(a.s - b.s), 1e-12);
  }
}

TEST(Somp, IdenticalObservationColumnsMatchOmp) {
  auto rng = make_rng(14, Stream::coefficients);
  for (int t = 0; t < 10; ++t) {
    auto m = random_phi(20, 12, 1, rng);
    const CMatrix col = fixtures::gaussian(20, 1, rng);
    const DecoupledObservations y3{col.replicate(1, 3)};
    const DecoupledObservations y1{col};
    const auto a = somp(y3, m, 3);
    const auto b = omp(y1, m, 3);
    EXPECT_EQ(a.support, b.support);
    EXPECT_LT(fixtures::max_abs(a.s.col(0) - b.s.col(0)), 1e-12);
  }
}

TEST(Omp, PicksPlantedColumnFirst) {
  auto rng = make_rng(15, Stream::coefficients);
  auto m = random_phi(16, 8, 1, rng);
  const DecoupledObservations y{2.5 * m.phi.col(3)};
  const auto r = omp(y, m, 1);
  EXPECT_EQ(r.support, (std::vector<int>{3}));
  EXPECT_NEAR(std::abs(r.s(3, 0) - 2.5), 0.0, 1e-12);
}

TEST(Omp, FirstPickMatchesBruteForce) {
  auto rng = make_rng(16, Stream::coefficients);
  for (int t = 0; t < 20; ++t) {
    auto m = random_phi(4, 6, 1, rng);
    const CMatrix y = fixtures::gaussian(4, 1, rng);
    int best = 0;
    for (int c = 1; c < 6; ++c)
      if (residual(y, m.phi, {c}) < residual(y, m.phi, {best})) best = c;
    const auto r = omp(DecoupledObservations{y}, m, 1);
    EXPECT_EQ(r.selected.front(), best);
  }
}

TEST(Bsomp, ReturnsExactlyKTapsAndJKRows) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  auto rng = make_rng(17, Stream::coefficients);
  const DecoupledObservations y{fixtures::gaussian(15, 3, rng)};
  const auto r = bsomp(y, phi, cfg.sparsity);
  EXPECT_EQ(r.support.size(), 3u);
  EXPECT_TRUE(std::is_sorted(r.support.begin(), r.support.end()));
  int nonzero_rows = 0;
  for (Eigen::Index i = 0; i < r.s.rows(); ++i) nonzero_rows += r.s.row(i).norm() > 0.0;
  EXPECT_EQ(nonzero_rows, 9);
  EXPECT_THROW(bsomp(y, phi, 6), std::invalid_argument);  // K J > G
}

TEST(EstimateChannel, ExactBemRecoveredToMachinePrecision) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  const BemBasis basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  auto rng = make_rng(18, Stream::coefficients);
  for (int t = 0; t < 5; ++t) {
    std::vector<int> support;
    const auto coeffs = random_coefficients(cfg, rng, &support);
    const auto real = synthesize_exact_bem_channel(coeffs, basis, cfg);
    TxFrame f = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
    embed_pilots(f, pattern);
    fill_random_data(f, rng);
    const RxFrame rx = transmit(f, real, kNoiseless, rng);
    const auto est = estimate_channel(rx, pattern, phi, basis, cfg, Recovery::bsomp, Smoothing::none);
    EXPECT_EQ(est.sparse.support, support);
    EXPECT_LE(nmse_db(data_taps(real), est.taps), -160.0);
  }
}

TEST(EstimateChannel, ZeroObservationsGiveZeroEstimate) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  const BemBasis basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  RxFrame rx;
  rx.symbols = CMatrix::Zero(cfg.n_symbols, cfg.n_subcarriers);
  const auto est = estimate_channel(rx, pattern, phi, basis, cfg, Recovery::bsomp, Smoothing::multi_symbol);
  for (const auto& t : est.taps) EXPECT_EQ(fixtures::max_abs(t), 0.0);
}

TEST(EstimateChannel, PerSymbolRequiresOneSymbolPattern) {
  SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  const BemBasis basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  RxFrame rx;
  rx.symbols = CMatrix::Zero(cfg.n_symbols, cfg.n_subcarriers);
  EXPECT_THROW(estimate_channel_per_symbol(rx, pattern, phi, basis, cfg, Recovery::bsomp, Smoothing::none),
               std::invalid_argument);
}

TEST(EstimateCsv, RowsAndSupportLine) {
  const SystemConfig cfg = small_config();
  const auto pattern = designed(cfg, 15);
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  auto rng = make_rng(19, Stream::coefficients);
  const auto r = bsomp(DecoupledObservations{fixtures::gaussian(15, 3, rng)}, phi, 3);
  std::ostringstream out;
  write_estimate_csv(r, cfg.delay_taps, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "l,j,q,re,im");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (line.rfind("support", 0) == 0) last = line;
    else ++rows;
  }
  EXPECT_EQ(rows, 16 * 3 * 3);
  std::ostringstream want;
  want << "support";
  for (int l : r.support) want << ',' << l;
  EXPECT_EQ(last, want.str());
}
