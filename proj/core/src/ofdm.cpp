#include "sdcs/ofdm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "sdcs/dft.hpp"

namespace sdcs {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

int TxFrame::data_count() const {
  return static_cast<int>(std::count(data_mask.begin(), data_mask.end(), true));
}

std::vector<cplx> qpsk_map(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: odd bit count");
  std::vector<cplx> out(bits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double re = bits[2 * i] ? -1.0 : 1.0;
    const double im = bits[2 * i + 1] ? -1.0 : 1.0;
    out[i] = {re * kInvSqrt2, im * kInvSqrt2};
  }
  return out;
}

Bits qpsk_demap(std::span<const cplx> symbols) {
  Bits bits(2 * symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
    bits[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
  }
  return bits;
}

TxFrame blank_frame(int n_symbols, int n_subcarriers) {
  TxFrame frame;
  frame.symbols = CMatrix::Zero(n_symbols, n_subcarriers);
  frame.data_mask.assign(static_cast<std::size_t>(n_symbols) * n_subcarriers, true);
  return frame;
}

void fill_data(TxFrame& frame, std::span<const std::uint8_t> bits) {
  const int count = frame.data_count();
  if (static_cast<int>(bits.size()) != 2 * count) {
    throw std::invalid_argument("fill_data: expected " + std::to_string(2 * count) + " bits, got " +
                                std::to_string(bits.size()));
  }
  const auto mapped = qpsk_map(bits);
  std::size_t next = 0;
  for (std::size_t a = 0; a < frame.data_mask.size(); ++a) {
    if (frame.data_mask[a]) frame.at(static_cast<int>(a)) = mapped[next++];
  }
  frame.payload_bits.assign(bits.begin(), bits.end());
}

void fill_random_data(TxFrame& frame, std::mt19937_64& rng) {
  Bits bits(2 * static_cast<std::size_t>(frame.data_count()));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  fill_data(frame, bits);
}

double average_power(const TxFrame& frame) {
  return frame.symbols.cwiseAbs2().mean();
}

CVector ofdm_modulate(const CVector& symbol, int cp_length) {
  const auto n = symbol.size();
  const CVector x = idft_unitary(symbol);
  CVector out(n + cp_length);
  out.head(cp_length) = x.tail(cp_length);
  out.tail(n) = x;
  return out;
}

CVector ofdm_demodulate(const CVector& samples, int cp_length) {
  return dft_unitary(samples.tail(samples.size() - cp_length));
}

RxFrame transmit(const TxFrame& frame, const ChannelRealization& real, double snr_db,
                 std::mt19937_64& noise_rng) {
  const int J = frame.n_symbols();
  const int N = frame.n_subcarriers();
  if (J != real.n_symbols || N != real.n_subcarriers) {
    throw std::invalid_argument("transmit: frame and channel dimensions differ");
  }
  if (real.delay_taps > real.cp_length) throw std::invalid_argument("transmit: L exceeds L_cp");
  const int cp = real.cp_length;
  const int span = real.symbol_length();

  RxFrame rx;
  rx.symbols.resize(J, N);
  CVector received(span);
  for (int j = 0; j < J; ++j) {
    const CVector x = ofdm_modulate(frame.symbols.row(j).transpose(), cp);
    received.setZero();
    // only data-portion outputs survive CP removal; x[t - l] never leaves symbol j
    for (int t = cp; t < span; ++t) {
      const int n = j * span + t;
      cplx acc{0.0, 0.0};
      for (int l : real.support) acc += real.gains(n, l) * x(t - l);
      received(t) = acc;
    }
    rx.symbols.row(j) = ofdm_demodulate(received, cp).transpose();
  }

  rx.snr_db = snr_db;
  if (std::isinf(snr_db) && snr_db > 0) return rx;

  const double signal_power = rx.symbols.cwiseAbs2().mean();
  rx.noise_variance = signal_power / std::pow(10.0, snr_db / 10.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(rx.noise_variance / 2.0));
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < N; ++k) {
      const double re = gauss(noise_rng);
      const double im = gauss(noise_rng);
      rx.symbols(j, k) += cplx{re, im};
    }
  }
  return rx;
}

CMatrix frequency_domain_matrix(const ChannelRealization& real, int j) {
  if (j < 0 || j >= real.n_symbols) throw std::out_of_range("frequency_domain_matrix: symbol index");
  const int N = real.n_subcarriers;
  // H_F(k, m) = sum_l w^{m l} D_l[k - m] / sqrt(N), D_l the unitary DFT of tap l over the symbol
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  CMatrix H = CMatrix::Zero(N, N);
  for (int l = 0; l < real.delay_taps; ++l) {
    const CVector trajectory = real.gains.block(real.data_index(j, 0), l, N, 1);
    if (trajectory.squaredNorm() == 0.0) continue;
    const CVector D = dft_unitary(trajectory) * scale;
    for (int m = 0; m < N; ++m) {
      const cplx w = std::polar(1.0, -2.0 * kPi * static_cast<double>((static_cast<long long>(m) * l) % N) / N);
      for (int k = 0; k < N; ++k) H(k, m) += w * D((k - m + N) % N);
    }
  }
  return H;
}

CVector equalize_zf(const CircularBandMatrix& h_f, const CVector& y) {
  return solve_circular_banded(h_f, y);
}

void write_frame_csv(const TxFrame& frame, std::ostream& out) {
  out << "j,k,re,im,data\n" << std::setprecision(17);
  const int N = frame.n_subcarriers();
  for (int j = 0; j < frame.n_symbols(); ++j) {
    for (int k = 0; k < N; ++k) {
      const cplx v = frame.symbols(j, k);
      out << j << ',' << k << ',' << v.real() << ',' << v.imag() << ','
          << (frame.data_mask[static_cast<std::size_t>(j) * N + k] ? 1 : 0) << '\n';
    }
  }
}

void write_frame_csv(const RxFrame& frame, std::ostream& out) {
  out << "j,k,re,im\n" << std::setprecision(17);
  for (int j = 0; j < frame.n_symbols(); ++j) {
    for (int k = 0; k < frame.n_subcarriers(); ++k) {
      const cplx v = frame.symbols(j, k);
      out << j << ',' << k << ',' << v.real() << ',' << v.imag() << '\n';
    }
  }
}

}  // namespace sdcs
