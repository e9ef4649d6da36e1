#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "sdcs/dschan.hpp"

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

}  // namespace

TEST(SystemConfig, DefaultsMatchReferenceNumerology) {
  SystemConfig c;
  EXPECT_EQ(c.n_subcarriers, 512);
  EXPECT_EQ(c.cp_length, 64);
  EXPECT_EQ(c.delay_taps, 64);
  EXPECT_EQ(c.sparsity, 6);
  EXPECT_EQ(c.bem_order, 3);
  EXPECT_DOUBLE_EQ(c.bandwidth_hz(), 7.68e6);
  EXPECT_NO_THROW(c.validate());
}

TEST(SystemConfig, RejectsStructuralViolations) {
  auto bad = [](auto edit) {
    SystemConfig c;
    edit(c);
    return c;
  };
  EXPECT_THROW(bad([](SystemConfig& c) { c.bem_order = 4; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemConfig& c) { c.delay_taps = 65; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemConfig& c) { c.sparsity = 65; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemConfig& c) { c.sparsity = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemConfig& c) { c.n_symbols = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemConfig& c) { c.bem_order = 513; }).validate(), std::invalid_argument);
}

TEST(Doppler, NormalizedShiftAtBothSpeeds) {
  SystemConfig c;
  c.speed_mps = 350.0 / 3.6;
  EXPECT_NEAR(normalized_doppler(c), 0.065, 1e-3);
  c.speed_mps = 500.0 / 3.6;
  EXPECT_NEAR(normalized_doppler(c), 0.093, 1e-3);
  c.speed_mps = 0.0;
  EXPECT_EQ(normalized_doppler(c), 0.0);
}

TEST(Doppler, NormalizedShiftClosedForm) {
  SystemConfig c;
  c.speed_mps = 27.0;
  EXPECT_DOUBLE_EQ(normalized_doppler(c), 3e9 * 27.0 / (2.99792458e8 * 15e3));
  EXPECT_DOUBLE_EQ(max_doppler_hz(c), 3e9 * 27.0 / 2.99792458e8);
}

TEST(Doppler, MaxJointSymbols) {
  SystemConfig c;
  c.speed_mps = 350.0 / 3.6;
  EXPECT_EQ(max_joint_symbols(c), 53);
  c.speed_mps = 500.0 / 3.6;
  EXPECT_EQ(max_joint_symbols(c), 37);
  c.n_symbols = 3;
  EXPECT_NO_THROW(check_joint_bound(c));
  c.speed_mps = 0.0;
  EXPECT_EQ(max_joint_symbols(c), kUnboundedSymbols);
}

TEST(Doppler, BoundTruncatesFractionalLimit) {
  SystemConfig c;
  c.speed_mps = 0.01 * kSpeedOfLight / (576.0 * 4.5);
  EXPECT_EQ(max_joint_symbols(c), 4);
}

TEST(Doppler, BoundViolationThrowsOrWarns) {
  SystemConfig c;
  c.speed_mps = 350.0 / 3.6;
  c.n_symbols = 54;
  EXPECT_THROW(check_joint_bound(c), std::invalid_argument);
  EXPECT_THROW(generate_channel(c, 1), std::invalid_argument);
  c.enforce_joint_bound = false;
  EXPECT_NO_THROW(check_joint_bound(c));
}

TEST(Channel, SupportHasKDistinctSortedTaps) {
  SystemConfig c;
  for (std::uint64_t seed = 1; seed < 20; ++seed) {
    const auto r = generate_channel(c, seed);
    ASSERT_EQ(r.support.size(), 6u);
    EXPECT_TRUE(std::is_sorted(r.support.begin(), r.support.end()));
    EXPECT_EQ(std::adjacent_find(r.support.begin(), r.support.end()), r.support.end());
    int nonzero_cols = 0;
    for (int l = 0; l < c.delay_taps; ++l) {
      const bool active = std::binary_search(r.support.begin(), r.support.end(), l);
      const bool nonzero = r.gains.col(l).squaredNorm() > 0.0;
      EXPECT_EQ(active, nonzero);
      nonzero_cols += nonzero;
    }
    EXPECT_EQ(nonzero_cols, 6);
    EXPECT_EQ(r.gains.rows(), c.frame_length());
  }
}

TEST(Channel, SupportStationaryOverTime) {
  const auto r = generate_channel(SystemConfig{}, 3);
  for (int l = 0; l < r.delay_taps; ++l) {
    const bool active = std::binary_search(r.support.begin(), r.support.end(), l);
    for (Eigen::Index n = 0; n < r.gains.rows(); ++n) {
      ASSERT_EQ(active, r.gains(n, l) != cplx(0.0)) << "tap " << l << " time " << n;
    }
  }
}

TEST(Channel, DeterministicPerSeed) {
  SystemConfig c = small_cfg();
  const auto a = generate_channel(c, 42), b = generate_channel(c, 42), d = generate_channel(c, 43);
  EXPECT_EQ(a.gains, b.gains);
  EXPECT_EQ(a.support, b.support);
  EXPECT_NE(a.gains, d.gains);
}

TEST(Channel, ZeroSpeedFreezesTaps) {
  SystemConfig c = small_cfg();
  c.speed_mps = 0.0;
  const auto r = generate_channel(c, 5);
  for (int l : r.support) {
    for (Eigen::Index n = 1; n < r.gains.rows(); ++n) ASSERT_EQ(r.gains(n, l), r.gains(0, l));
  }
}

TEST(Channel, TapSupportUniformIncludingTapZero) {
  SystemConfig c = small_cfg();
  std::vector<int> hits(c.delay_taps, 0);
  const int draws = 4000;
  for (int s = 0; s < draws; ++s) {
    for (int l : generate_channel(c, s).support) ++hits[l];
  }
  const double expected = static_cast<double>(draws) * c.sparsity / c.delay_taps;
  for (int l = 0; l < c.delay_taps; ++l) EXPECT_NEAR(hits[l], expected, 5.0 * std::sqrt(expected)) << l;
}

TEST(Channel, TapVarianceIsOneOverK) {
  // 10^4 realizations; one sample per active tap per realization
  SystemConfig c;
  c.n_subcarriers = 16;
  c.cp_length = 4;
  c.delay_taps = 4;
  c.sparsity = 3;
  c.n_symbols = 1;
  double acc = 0.0;
  long count = 0;
  double energy = 0.0;
  const int realizations = 10000;
  for (int s = 0; s < realizations; ++s) {
    const auto r = generate_channel(c, 1000 + s);
    energy += r.gains.row(7).squaredNorm();
    for (int l : r.support) {
      acc += std::norm(r.gains(7, l));
      ++count;
    }
  }
  EXPECT_NEAR(acc / count, 1.0 / 3.0, 0.05 / 3.0);
  EXPECT_NEAR(energy / realizations, 1.0, 0.1);
}

TEST(Channel, VarianceAtDefaultSparsity) {
  SystemConfig c;
  c.n_symbols = 1;
  double acc = 0.0;
  long count = 0;
  for (int s = 0; s < 2000; ++s) {
    const auto r = generate_channel(c, 77 + s);
    for (int l : r.support) {
      for (int n : {0, 250, 500}) {
        acc += std::norm(r.gains(n, l));
        ++count;
      }
    }
  }
  EXPECT_NEAR(acc / count, 1.0 / 6.0, 0.05 / 6.0);
}

TEST(Channel, AutocorrelationFollowsBesselJ0) {
  // large Doppler so lags up to N cover the first zero of J0
  SystemConfig c;
  c.n_subcarriers = 128;
  c.cp_length = 16;
  c.delay_taps = 16;
  c.sparsity = 1;
  c.n_symbols = 1;
  c.enforce_joint_bound = false;
  c.speed_mps = 3.0 * kSpeedOfLight * c.delta_f_hz / c.carrier_hz;  // NDS = 3
  const double fd_ts = max_doppler_hz(c) * c.sample_period_s();
  const int N = c.n_subcarriers;
  std::vector<double> corr(N + 1, 0.0);
  const int realizations = 600;
  for (int s = 0; s < realizations; ++s) {
    const auto r = generate_channel(c, 9000 + s);
    const auto h = r.gains.col(r.support.front());
    for (int tau = 0; tau <= N; ++tau) {
      double sum = 0.0;
      const int span = static_cast<int>(h.size()) - tau;
      for (int n = 0; n < span; ++n) sum += std::real(h(n + tau) * std::conj(h(n)));
      corr[tau] += sum / span;
    }
  }
  double sq = 0.0;
  for (int tau = 0; tau <= N; ++tau) {
    const double model = std::cyl_bessel_j(0.0, 2.0 * kPi * fd_ts * tau);
    sq += std::pow(corr[tau] / realizations - model, 2);
  }
  EXPECT_LT(std::sqrt(sq / (N + 1)), 0.05);
}

TEST(TimeDomainMatrix, SingleUnitTapIsIdentity) {
  SystemConfig c = small_cfg();
  auto r = generate_channel(c, 1);
  r.gains.setZero();
  r.gains.col(0).setOnes();
  r.support = {0};
  for (int j = 0; j < c.n_symbols; ++j) {
    EXPECT_EQ(time_domain_matrix(r, j), CMatrix(CMatrix::Identity(64, 64)));
  }
}

TEST(TimeDomainMatrix, TimeInvariantIsCirculant) {
  SystemConfig c = small_cfg();
  c.speed_mps = 0.0;
  const auto r = generate_channel(c, 11);
  const CMatrix H = time_domain_matrix(r, 1);
  const int N = c.n_subcarriers;
  CMatrix shift = CMatrix::Zero(N, N);
  for (int p = 0; p < N; ++p) shift((p + 1) % N, p) = 1.0;
  EXPECT_LT(fixtures::max_abs(H * shift - shift * H), 1e-14);
  for (int p = 1; p < N; ++p) {
    for (int q = 0; q < N; ++q) ASSERT_EQ(H(p, q), H(0, (q - p + N) % N));
  }
}

TEST(TimeDomainMatrix, HandEvaluatedToyChannel) {
  // N = 4, L = L_cp = 2, J = 2: entry (p, q) = h[j*6 + 2 + p, (p - q) mod 4] for lags < 2
  ChannelRealization r;
  r.n_subcarriers = 4;
  r.cp_length = 2;
  r.delay_taps = 2;
  r.sparsity = 2;
  r.n_symbols = 2;
  r.support = {0, 1};
  r.gains.resize(12, 2);
  for (int n = 0; n < 12; ++n) {
    r.gains(n, 0) = cplx(1.0 + n, 0.5 * n);
    r.gains(n, 1) = cplx(-0.25 * n, 2.0 - n);
  }
  const CMatrix H = time_domain_matrix(r, 1);
  CMatrix expected = CMatrix::Zero(4, 4);
  for (int p = 0; p < 4; ++p) {
    const int n = 6 + 2 + p;
    expected(p, p) = r.gains(n, 0);
    expected(p, (p + 3) % 4) = r.gains(n, 1);
  }
  EXPECT_EQ(H, expected);
}

TEST(TimeDomainMatrix, RejectsBadSymbol) {
  const auto r = generate_channel(small_cfg(), 1);
  EXPECT_THROW(time_domain_matrix(r, 2), std::out_of_range);
  EXPECT_THROW(time_domain_matrix(r, -1), std::out_of_range);
}

TEST(DataTaps, SlicesDataPortions) {
  const auto r = generate_channel(small_cfg(), 2);
  const auto taps = data_taps(r);
  ASSERT_EQ(taps.size(), 2u);
  for (int j = 0; j < 2; ++j) {
    for (int p = 0; p < 64; ++p) ASSERT_EQ(taps[j].row(p), r.gains.row(r.data_index(j, p)));
  }
}

TEST(ChannelCsv, RoundTripIsExact) {
  const auto r = generate_channel(small_cfg(), 8);
  std::stringstream ss;
  write_channel_csv(r, ss);
  const auto back = read_channel_csv(ss);
  EXPECT_EQ(back.gains, r.gains);
  EXPECT_EQ(back.support, r.support);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.n_symbols, r.n_symbols);
  EXPECT_EQ(back.cp_length, r.cp_length);
}

TEST(ChannelCsv, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_channel_csv(empty), std::runtime_error);
  std::stringstream truncated("N,L_cp,L,K,J,seed\n4,2,2,1,1,0\n1,0,0,0\n");
  EXPECT_THROW(read_channel_csv(truncated), std::runtime_error);
  // two active taps while K = 1
  std::stringstream too_many("N,L_cp,L,K,J,seed\n2,1,2,1,1,0\n1,0,1,0\n1,0,1,0\n1,0,1,0\n");
  EXPECT_THROW(read_channel_csv(too_many), std::runtime_error);
}
