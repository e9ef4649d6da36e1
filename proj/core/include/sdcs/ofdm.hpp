#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "sdcs/banded.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/types.hpp"

namespace sdcs {

using Bits = std::vector<std::uint8_t>;

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// Frequency-domain frame of J symbols. Aggregate index a = j N + k.
struct TxFrame {
  CMatrix symbols;               // J x N
  std::vector<bool> data_mask;   // J N entries, true on data subcarriers
  Bits payload_bits;             // bits carried on the data subcarriers, in aggregate order

  int n_symbols() const { return static_cast<int>(symbols.rows()); }
  int n_subcarriers() const { return static_cast<int>(symbols.cols()); }
  int data_count() const;
  cplx& at(int aggregate) { return symbols(aggregate / n_subcarriers(), aggregate % n_subcarriers()); }
  const cplx& at(int aggregate) const {
    return symbols(aggregate / n_subcarriers(), aggregate % n_subcarriers());
  }
};

struct RxFrame {
  CMatrix symbols;  // J x N, after CP removal and DFT
  double snr_db = kNoiseless;
  double noise_variance = 0.0;

  int n_symbols() const { return static_cast<int>(symbols.rows()); }
  int n_subcarriers() const { return static_cast<int>(symbols.cols()); }
  const cplx& at(int aggregate) const {
    return symbols(aggregate / n_subcarriers(), aggregate % n_subcarriers());
  }
};

/// Gray QPSK: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2); 00 -> (1+j)/sqrt(2).
std::vector<cplx> qpsk_map(std::span<const std::uint8_t> bits);
/// Minimum-distance hard decisions.
Bits qpsk_demap(std::span<const cplx> symbols);

/// All-data frame of zeros.
TxFrame blank_frame(int n_symbols, int n_subcarriers);
/// Maps exactly 2 * data_count() bits onto the data subcarriers.
void fill_data(TxFrame& frame, std::span<const std::uint8_t> bits);
/// Uniform random bits for every data subcarrier.
void fill_random_data(TxFrame& frame, std::mt19937_64& rng);
double average_power(const TxFrame& frame);

/// IDFT (unitary) followed by a cyclic prefix of cp_length samples.
CVector ofdm_modulate(const CVector& symbol, int cp_length);
/// Drops the cyclic prefix and applies the unitary DFT.
CVector ofdm_demodulate(const CVector& samples, int cp_length);

/// Time-varying convolution y[n] = sum_l h[n, l] x[n - l] over the CP-extended
/// stream, CP removal, DFT, and complex AWGN. The noise variance is set from the
/// measured noise-free received power of the frame. snr_db = kNoiseless disables noise.
RxFrame transmit(const TxFrame& frame, const ChannelRealization& real, double snr_db,
                 std::mt19937_64& noise_rng);

/// Complete frequency-domain matrix F H_T F^H of symbol j, built from the
/// DFT of each active tap's trajectory.
CMatrix frequency_domain_matrix(const ChannelRealization& real, int j);

/// Zero-forcing equalization: solves H_F x = y with the banded LU solver.
CVector equalize_zf(const CircularBandMatrix& h_f, const CVector& y);

/// Debug CSV rows (j, k, re, im[, data]).
void write_frame_csv(const TxFrame& frame, std::ostream& out);
void write_frame_csv(const RxFrame& frame, std::ostream& out);

}  // namespace sdcs
