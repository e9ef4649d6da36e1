#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "sdcs/types.hpp"

namespace sdcs {

/// OFDM numerology and channel statistics shared by every module.
/// Defaults follow the LTE-like configuration used throughout the project.
struct SystemConfig {
  int n_subcarriers = 512;   // N
  int cp_length = 64;        // L_cp, samples
  int delay_taps = 64;       // L, maximum delay spread in taps
  int sparsity = 6;          // K, active taps
  int n_symbols = 3;         // J, jointly estimated symbols
  int bem_order = 3;         // Q, odd
  double delta_f_hz = 15e3;
  double carrier_hz = 3e9;
  double speed_mps = 350.0 / 3.6;
  std::uint64_t seed = 1;
  int oscillators = 64;      // sum-of-sinusoids terms per tap
  bool enforce_joint_bound = true;

  double bandwidth_hz() const { return n_subcarriers * delta_f_hz; }
  double sample_period_s() const { return 1.0 / bandwidth_hz(); }
  int symbol_length() const { return n_subcarriers + cp_length; }
  int frame_length() const { return n_symbols * symbol_length(); }
  int half_order() const { return (bem_order - 1) / 2; }

  /// Throws std::invalid_argument on structural violations (odd Q, L <= L_cp, ...).
  /// The joint-symbol bound is not checked here; see check_joint_bound().
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

inline constexpr int kUnboundedSymbols = std::numeric_limits<int>::max();

double max_doppler_hz(const SystemConfig& cfg);

/// f_c v / (c delta_f).
double normalized_doppler(const SystemConfig& cfg);

/// Largest J with J < 0.01 c / ((N + L_cp) v); kUnboundedSymbols when v == 0.
int max_joint_symbols(const SystemConfig& cfg);

/// Throws (or warns on stderr when cfg.enforce_joint_bound is false) if
/// cfg.n_symbols exceeds max_joint_symbols(cfg).
void check_joint_bound(const SystemConfig& cfg);

/// Ground-truth gains h[n, l] over the whole frame, CP regions included.
struct ChannelRealization {
  int n_subcarriers = 0;
  int cp_length = 0;
  int delay_taps = 0;
  int sparsity = 0;
  int n_symbols = 0;
  std::uint64_t seed = 0;
  CMatrix gains;            // (J (N + L_cp)) x L, row = global time index
  std::vector<int> support;  // sorted active taps

  int symbol_length() const { return n_subcarriers + cp_length; }
  /// Global time index of local data sample p of symbol j.
  int data_index(int j, int p) const { return j * symbol_length() + cp_length + p; }
};

/// Sparse Jakes channel: K taps drawn uniformly without replacement from
/// [0, L-1], each an independent sum-of-sinusoids process of variance 1/K.
ChannelRealization generate_channel(const SystemConfig& cfg, std::uint64_t seed);
inline ChannelRealization generate_channel(const SystemConfig& cfg) {
  return generate_channel(cfg, cfg.seed);
}

/// N x N time-domain matrix of symbol j: entry (p, q) = h[jN' + L_cp + p, (p - q) mod N].
CMatrix time_domain_matrix(const ChannelRealization& real, int j);

/// Data-portion trajectories, taps[j](p, l) = h[data_index(j, p), l].
TapTrajectories data_taps(const ChannelRealization& real);

void write_channel_csv(const ChannelRealization& real, std::ostream& out);
void write_channel_csv(const ChannelRealization& real, const std::string& path);
ChannelRealization read_channel_csv(std::istream& in);
ChannelRealization read_channel_csv(const std::string& path);

}  // namespace sdcs
