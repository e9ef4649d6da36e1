#include "sdcs/dschan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sdcs/rng.hpp"

namespace sdcs {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("SystemConfig: " + what);
}

// Re-anchor the oscillator phasors this often to bound rotation drift.
constexpr int kResyncPeriod = 64;

}  // namespace

void SystemConfig::validate() const {
  require(n_subcarriers >= 2, "n_subcarriers must be >= 2");
  require(cp_length >= 0, "cp_length must be >= 0");
  require(delay_taps >= 1, "delay_taps must be >= 1");
  require(delay_taps <= cp_length, "delay_taps must not exceed cp_length");
  require(delay_taps <= n_subcarriers, "delay_taps must not exceed n_subcarriers");
  require(sparsity >= 1, "sparsity must be >= 1");
  require(sparsity <= delay_taps, "sparsity must not exceed delay_taps");
  require(n_symbols >= 1, "n_symbols must be >= 1");
  require(bem_order >= 1 && bem_order % 2 == 1, "bem_order must be odd and positive");
  require(bem_order < n_subcarriers, "bem_order must be smaller than n_subcarriers");
  require(delta_f_hz > 0.0, "delta_f_hz must be positive");
  require(carrier_hz > 0.0, "carrier_hz must be positive");
  require(speed_mps >= 0.0, "speed must be non-negative");
  require(oscillators >= 1, "oscillators must be >= 1");
}

double max_doppler_hz(const SystemConfig& cfg) {
  return cfg.carrier_hz * cfg.speed_mps / kSpeedOfLight;
}

double normalized_doppler(const SystemConfig& cfg) {
  return max_doppler_hz(cfg) / cfg.delta_f_hz;
}

int max_joint_symbols(const SystemConfig& cfg) {
  if (cfg.speed_mps <= 0.0) return kUnboundedSymbols;
  const double bound = 0.01 * kSpeedOfLight / (cfg.symbol_length() * cfg.speed_mps);
  // strict inequality: largest integer strictly below the bound
  const double below = std::ceil(bound) - 1.0;
  if (below >= static_cast<double>(kUnboundedSymbols)) return kUnboundedSymbols - 1;
  return static_cast<int>(below);
}

void check_joint_bound(const SystemConfig& cfg) {
  const int limit = max_joint_symbols(cfg);
  if (cfg.n_symbols <= limit) return;
  std::ostringstream msg;
  msg << "n_symbols = " << cfg.n_symbols << " exceeds the delay-stationarity limit "
      << limit << " at " << cfg.speed_mps << " m/s";
  if (cfg.enforce_joint_bound) throw std::invalid_argument(msg.str());
  std::cerr << "warning: " << msg.str() << '\n';
}

ChannelRealization generate_channel(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_joint_bound(cfg);

  ChannelRealization real;
  real.n_subcarriers = cfg.n_subcarriers;
  real.cp_length = cfg.cp_length;
  real.delay_taps = cfg.delay_taps;
  real.sparsity = cfg.sparsity;
  real.n_symbols = cfg.n_symbols;
  real.seed = seed;

  auto support_rng = make_rng(seed, Stream::support);
  std::vector<int> taps(cfg.delay_taps);
  std::iota(taps.begin(), taps.end(), 0);
  // partial Fisher-Yates with an explicit index draw keeps the result
  // independent of std::shuffle's implementation
  for (int i = 0; i < cfg.sparsity; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg.delay_taps - 1);
    std::swap(taps[i], taps[pick(support_rng)]);
  }
  real.support.assign(taps.begin(), taps.begin() + cfg.sparsity);
  std::sort(real.support.begin(), real.support.end());

  const int length = cfg.frame_length();
  const int M = cfg.oscillators;
  real.gains = CMatrix::Zero(length, cfg.delay_taps);

  auto osc_rng = make_rng(seed, Stream::oscillators);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  const double fd_ts = max_doppler_hz(cfg) * cfg.sample_period_s();
  const double amplitude = std::sqrt(1.0 / (static_cast<double>(cfg.sparsity) * M));

  std::vector<double> omega(M), phase(M);
  std::vector<cplx> rot(M), z(M);
  for (int l : real.support) {
    for (int m = 0; m < M; ++m) {
      const double arrival = angle(osc_rng);
      phase[m] = angle(osc_rng);
      omega[m] = 2.0 * kPi * fd_ts * std::cos(arrival);
      rot[m] = std::polar(1.0, omega[m]);
    }
    for (int n = 0; n < length; ++n) {
      if (n % kResyncPeriod == 0) {
        for (int m = 0; m < M; ++m) z[m] = std::polar(1.0, omega[m] * n + phase[m]);
      }
      cplx acc{0.0, 0.0};
      for (int m = 0; m < M; ++m) {
        acc += z[m];
        z[m] *= rot[m];
      }
      real.gains(n, l) = amplitude * acc;
    }
  }
  return real;
}

CMatrix time_domain_matrix(const ChannelRealization& real, int j) {
  if (j < 0 || j >= real.n_symbols) throw std::out_of_range("time_domain_matrix: symbol index");
  const int N = real.n_subcarriers;
  CMatrix H = CMatrix::Zero(N, N);
  for (int p = 0; p < N; ++p) {
    const int n = real.data_index(j, p);
    for (int q = 0; q < N; ++q) {
      const int l = ((p - q) % N + N) % N;
      if (l < real.delay_taps) H(p, q) = real.gains(n, l);
    }
  }
  return H;
}

TapTrajectories data_taps(const ChannelRealization& real) {
  TapTrajectories taps(real.n_symbols);
  for (int j = 0; j < real.n_symbols; ++j) {
    taps[j] = real.gains.middleRows(real.data_index(j, 0), real.n_subcarriers);
  }
  return taps;
}

void write_channel_csv(const ChannelRealization& real, std::ostream& out) {
  out << "N,L_cp,L,K,J,seed\n";
  out << real.n_subcarriers << ',' << real.cp_length << ',' << real.delay_taps << ','
      << real.sparsity << ',' << real.n_symbols << ',' << real.seed << '\n';
  out << std::setprecision(17);
  for (Eigen::Index n = 0; n < real.gains.rows(); ++n) {
    for (Eigen::Index l = 0; l < real.gains.cols(); ++l) {
      if (l > 0) out << ',';
      out << real.gains(n, l).real() << ',' << real.gains(n, l).imag();
    }
    out << '\n';
  }
}

void write_channel_csv(const ChannelRealization& real, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_channel_csv(real, out);
}

ChannelRealization read_channel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("N,L_cp,L,K,J,seed", 0) != 0) {
    throw std::runtime_error("channel csv: missing header");
  }
  ChannelRealization real;
  {
    if (!std::getline(in, line)) throw std::runtime_error("channel csv: missing dimensions");
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream dims(line);
    if (!(dims >> real.n_subcarriers >> real.cp_length >> real.delay_taps >> real.sparsity >>
          real.n_symbols >> real.seed)) {
      throw std::runtime_error("channel csv: malformed dimensions");
    }
  }
  if (real.n_subcarriers < 1 || real.cp_length < 0 || real.delay_taps < 1 ||
      real.n_symbols < 1 || real.sparsity < 1) {
    throw std::runtime_error("channel csv: invalid dimensions");
  }
  const int rows = real.n_symbols * real.symbol_length();
  real.gains = CMatrix::Zero(rows, real.delay_taps);
  for (int n = 0; n < rows; ++n) {
    if (!std::getline(in, line)) throw std::runtime_error("channel csv: truncated gains");
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    for (int l = 0; l < real.delay_taps; ++l) {
      double re = 0.0, im = 0.0;
      if (!(row >> re >> im)) throw std::runtime_error("channel csv: short row " + std::to_string(n));
      real.gains(n, l) = {re, im};
    }
  }
  for (int l = 0; l < real.delay_taps; ++l) {
    if (real.gains.col(l).cwiseAbs2().sum() > 0.0) real.support.push_back(l);
  }
  if (static_cast<int>(real.support.size()) > real.sparsity) {
    throw std::runtime_error("channel csv: more active taps than declared sparsity");
  }
  return real;
}

ChannelRealization read_channel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_channel_csv(in);
}

}  // namespace sdcs
