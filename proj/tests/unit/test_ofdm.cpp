#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "sdcs/bem.hpp"
#include "sdcs/dft.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/rng.hpp"

using namespace sdcs;

namespace {

SystemConfig small_cfg() {
  SystemConfig c;
  c.n_subcarriers = 64;
  c.cp_length = 16;
  c.delay_taps = 16;
  c.sparsity = 3;
  c.n_symbols = 2;
  return c;
}

TxFrame random_frame(int J, int N, std::uint64_t seed) {
  TxFrame f = blank_frame(J, N);
  auto rng = make_rng(seed, Stream::data);
  fill_random_data(f, rng);
  return f;
}

ChannelRealization unit_channel(const SystemConfig& cfg) {
  auto r = generate_channel(cfg, 1);
  r.gains.setZero();
  r.gains.col(0).setOnes();
  r.support = {0};
  return r;
}

}  // namespace

TEST(Qpsk, GrayConvention) {
  const Bits bits{0, 0, 0, 1, 1, 0, 1, 1};
  const auto s = qpsk_map(bits);
  const double a = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(s[0], cplx(a, a));
  EXPECT_EQ(s[1], cplx(a, -a));
  EXPECT_EQ(s[2], cplx(-a, a));
  EXPECT_EQ(s[3], cplx(-a, -a));
  for (const auto& x : s) EXPECT_NEAR(std::norm(x), 1.0, 1e-15);
}

TEST(Qpsk, RoundTripAndNoisyDecisions) {
  auto rng = make_rng(2, Stream::data);
  Bits bits(2000);
  for (auto& b : bits) b = rng() & 1U;
  auto symbols = qpsk_map(bits);
  EXPECT_EQ(qpsk_demap(symbols), bits);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (auto& s : symbols) s += cplx(n(rng), n(rng));
  EXPECT_EQ(qpsk_demap(symbols), bits);
}

TEST(Qpsk, RejectsOddBitCount) {
  const Bits bits{1, 0, 1};
  EXPECT_THROW(qpsk_map(bits), std::invalid_argument);
}

TEST(Frame, FillDataNeedsExactBitCount) {
  TxFrame f = blank_frame(2, 8);
  f.data_mask[3] = false;
  EXPECT_EQ(f.data_count(), 15);
  EXPECT_THROW(fill_data(f, Bits(28, 0)), std::invalid_argument);
  EXPECT_NO_THROW(fill_data(f, Bits(30, 0)));
  EXPECT_EQ(f.at(3), cplx(0.0));
  EXPECT_NEAR(std::abs(f.at(4)), 1.0, 1e-15);
}

TEST(Frame, UnitAveragePower) {
  const auto f = random_frame(3, 64, 4);
  EXPECT_NEAR(average_power(f), 1.0, 1e-12);
}

TEST(Modulation, UnitaryRoundTrip) {
  auto rng = make_rng(3, Stream::data);
  const CVector x = fixtures::gaussian(64, 1, rng);
  const CVector t = ofdm_modulate(x, 16);
  ASSERT_EQ(t.size(), 80);
  EXPECT_EQ(t.head(16), t.tail(16));
  EXPECT_LT(fixtures::max_abs(ofdm_demodulate(t, 16) - x), 1e-12);
  // Parseval on the data portion
  EXPECT_NEAR(t.tail(64).squaredNorm(), x.squaredNorm(), 1e-10 * x.squaredNorm());
}

TEST(Dft, MatchesDenseMatrix) {
  auto rng = make_rng(4, Stream::data);
  for (int n : {7, 16, 60}) {
    const CVector x = fixtures::gaussian(n, 1, rng);
    const CMatrix F = dft_matrix(n);
    EXPECT_LT(fixtures::max_abs(dft_unitary(x) - F * x), 1e-12);
    EXPECT_LT(fixtures::max_abs(idft_unitary(dft_unitary(x)) - x), 1e-12);
    EXPECT_LT(fixtures::max_abs(F.adjoint() * F - CMatrix::Identity(n, n)), 1e-12);
  }
}

TEST(Transmit, IdentityChannelNoNoiseIsTransparent) {
  const auto cfg = small_cfg();
  const auto f = random_frame(2, 64, 5);
  auto rng = make_rng(1, Stream::noise);
  const auto rx = transmit(f, unit_channel(cfg), kNoiseless, rng);
  EXPECT_LT(fixtures::max_abs(rx.symbols - f.symbols), 1e-12);
  EXPECT_EQ(rx.noise_variance, 0.0);
}

TEST(Transmit, TimeInvariantChannelIsDiagonal) {
  auto cfg = small_cfg();
  cfg.speed_mps = 0.0;
  const auto real = generate_channel(cfg, 6);
  const auto f = random_frame(2, 64, 6);
  auto rng = make_rng(1, Stream::noise);
  const auto rx = transmit(f, real, kNoiseless, rng);
  for (int j = 0; j < 2; ++j) {
    const CVector lambda = frequency_response(real.gains.row(0).transpose(), 64);
    const CVector expected = lambda.cwiseProduct(f.symbols.row(j).transpose());
    EXPECT_LT(fixtures::max_abs(rx.symbols.row(j).transpose() - expected), 1e-10);
  }
}

TEST(Transmit, ExactBemChannelMatchesBandedModel) {
  const auto cfg = small_cfg();
  const auto b = build_basis(cfg.n_subcarriers, cfg.bem_order);
  const auto c = fit_coefficients(generate_channel(cfg, 7), b);
  const auto real = synthesize_exact_bem_channel(c, b, cfg);
  const auto f = random_frame(2, 64, 7);
  auto rng = make_rng(1, Stream::noise);
  const auto rx = transmit(f, real, kNoiseless, rng);
  for (int j = 0; j < 2; ++j) {
    const CVector expected = frequency_channel_matrix(c, cfg, j) * f.symbols.row(j).transpose();
    EXPECT_LT(fixtures::max_abs(rx.symbols.row(j).transpose() - expected), 1e-9);
  }
}

TEST(Transmit, GeneralChannelMatchesTimeDomainMatrix) {
  const auto cfg = small_cfg();
  const auto real = generate_channel(cfg, 8);
  const auto f = random_frame(2, 64, 8);
  auto rng = make_rng(1, Stream::noise);
  const auto rx = transmit(f, real, kNoiseless, rng);
  const CMatrix F = dft_matrix(64);
  for (int j = 0; j < 2; ++j) {
    const CVector expected = F * time_domain_matrix(real, j) * F.adjoint() * f.symbols.row(j).transpose();
    EXPECT_LT(fixtures::max_abs(rx.symbols.row(j).transpose() - expected), 1e-10);
  }
}

TEST(Transmit, TimeVaryingChannelCreatesIci) {
  auto cfg = small_cfg();
  cfg.speed_mps = 500.0 / 3.6;
  const auto real = generate_channel(cfg, 9);
  const CMatrix F = dft_matrix(64);
  const CMatrix H = F * time_domain_matrix(real, 0) * F.adjoint();
  const CMatrix off = H - CMatrix(H.diagonal().asDiagonal());
  EXPECT_GT(fixtures::max_abs(off), 1e-6);

  cfg.speed_mps = 0.0;
  const auto still = generate_channel(cfg, 9);
  const CMatrix H0 = F * time_domain_matrix(still, 0) * F.adjoint();
  EXPECT_LT(fixtures::max_abs(H0 - CMatrix(H0.diagonal().asDiagonal())), 1e-10);
}

TEST(Transmit, NoiseCalibrationWithinTenthOfDb) {
  // 10^4 symbols of N = 64 through a fixed channel
  auto cfg = small_cfg();
  cfg.n_symbols = 1;
  const auto real = generate_channel(cfg, 10);
  double signal = 0.0, noise = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const auto f = random_frame(1, 64, 10 + s);
    auto clean_rng = make_rng(s, Stream::noise);
    const auto clean = transmit(f, real, kNoiseless, clean_rng);
    auto rng = make_rng(s, Stream::noise);
    const auto rx = transmit(f, real, 10.0, rng);
    signal += clean.symbols.squaredNorm();
    noise += (rx.symbols - clean.symbols).squaredNorm();
  }
  EXPECT_NEAR(10.0 * std::log10(signal / noise), 10.0, 0.1);
}

TEST(Transmit, NoiseVarianceFollowsMeasuredPower) {
  const auto cfg = small_cfg();
  const auto real = generate_channel(cfg, 11);
  const auto f = random_frame(2, 64, 11);
  auto clean_rng = make_rng(0, Stream::noise);
  const auto clean = transmit(f, real, kNoiseless, clean_rng);
  auto rng = make_rng(0, Stream::noise);
  const auto rx = transmit(f, real, 20.0, rng);
  const double power = clean.symbols.cwiseAbs2().mean();
  EXPECT_NEAR(rx.noise_variance, power / 100.0, 1e-12 * power);
  EXPECT_EQ(rx.snr_db, 20.0);
}

TEST(Transmit, RejectsMismatchedDimensions) {
  const auto cfg = small_cfg();
  const auto real = generate_channel(cfg, 1);
  auto rng = make_rng(0, Stream::noise);
  EXPECT_THROW(transmit(random_frame(3, 64, 1), real, kNoiseless, rng), std::invalid_argument);
  EXPECT_THROW(transmit(random_frame(2, 32, 1), real, kNoiseless, rng), std::invalid_argument);
}

TEST(Equalize, DiagonalIsElementwiseDivision) {
  auto rng = make_rng(12, Stream::data);
  CircularBandMatrix h(16, 1);
  const CVector d = fixtures::gaussian(16, 1, rng);
  for (int m = 0; m < 16; ++m) h.diag(0, m) = d(m);
  const CVector y = fixtures::gaussian(16, 1, rng);
  EXPECT_LT(fixtures::max_abs(equalize_zf(h, y) - y.cwiseQuotient(d)), 1e-12);
}

TEST(Equalize, IdentityLeavesInputUnchanged) {
  auto rng = make_rng(13, Stream::data);
  CircularBandMatrix h(16, 2);
  for (int m = 0; m < 16; ++m) h.diag(0, m) = 1.0;
  const CVector y = fixtures::gaussian(16, 1, rng);
  EXPECT_LT(fixtures::max_abs(equalize_zf(h, y) - y), 1e-14);
}

TEST(FrameCsv, Headers) {
  std::stringstream tx, rx;
  auto f = random_frame(1, 4, 1);
  write_frame_csv(f, tx);
  RxFrame r;
  r.symbols = f.symbols;
  write_frame_csv(r, rx);
  std::string line;
  std::getline(tx, line);
  EXPECT_EQ(line, "j,k,re,im,data");
  std::getline(rx, line);
  EXPECT_EQ(line, "j,k,re,im");
}

TEST(FrequencyDomainMatrix, MatchesDenseTransform) {
  SystemConfig cfg;
  cfg.n_subcarriers = 64;
  cfg.cp_length = 8;
  cfg.delay_taps = 8;
  cfg.sparsity = 3;
  cfg.n_symbols = 2;
  cfg.speed_mps = 200.0;
  const auto real = generate_channel(cfg, 5);
  const CMatrix F = dft_matrix(64);
  for (int j = 0; j < 2; ++j) {
    const CMatrix dense = F * time_domain_matrix(real, j) * F.adjoint();
    EXPECT_LT(fixtures::max_abs(frequency_domain_matrix(real, j) - dense), 1e-12);
  }
  EXPECT_THROW(frequency_domain_matrix(real, 2), std::out_of_range);
}
