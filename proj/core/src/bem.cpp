#include "sdcs/bem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "sdcs/dft.hpp"

namespace sdcs {

namespace {

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(ratio));
}

}  // namespace

cplx basis_value(int n_samples, int order, int n, int q) {
  const long long tone = q - (order - 1) / 2;
  // reduce the phase exactly in integers before scaling
  const long long k = ((static_cast<long long>(n) * tone) % n_samples + n_samples) % n_samples;
  return std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / n_samples);
}

BemBasis build_basis(int n_samples, int order) {
  if (order < 1 || order % 2 == 0) throw std::invalid_argument("build_basis: order must be odd");
  if (order >= n_samples) throw std::invalid_argument("build_basis: order must be below N");
  BemBasis basis;
  basis.n_samples = n_samples;
  basis.order = order;
  basis.vectors.resize(n_samples, order);
  for (int q = 0; q < order; ++q) {
    for (int n = 0; n < n_samples; ++n) basis.vectors(n, q) = basis_value(n_samples, order, n, q);
  }
  basis.qr.compute(basis.vectors);
  return basis;
}

BemCoefficients::BemCoefficients(int n_symbols, int order, int delay_taps)
    : c(n_symbols, CMatrix::Zero(order, delay_taps)) {}

std::vector<int> BemCoefficients::active_taps() const {
  std::vector<int> taps;
  for (int l = 0; l < delay_taps(); ++l) {
    bool active = false;
    for (const auto& cj : c) active = active || cj.col(l).squaredNorm() > 0.0;
    if (active) taps.push_back(l);
  }
  return taps;
}

BemCoefficients fit_coefficients(const TapTrajectories& taps, const BemBasis& basis) {
  if (taps.empty()) return {};
  const int L = static_cast<int>(taps.front().cols());
  BemCoefficients coeffs(static_cast<int>(taps.size()), basis.order, L);
  for (std::size_t j = 0; j < taps.size(); ++j) {
    if (taps[j].rows() != basis.n_samples) throw std::invalid_argument("fit_coefficients: length");
    coeffs.c[j] = basis.qr.solve(taps[j]);
  }
  return coeffs;
}

BemCoefficients fit_coefficients(const ChannelRealization& real, const BemBasis& basis) {
  return fit_coefficients(data_taps(real), basis);
}

TapTrajectories reconstruct_taps(const BemCoefficients& coeffs, const BemBasis& basis) {
  TapTrajectories taps(coeffs.n_symbols());
  for (int j = 0; j < coeffs.n_symbols(); ++j) taps[j] = basis.vectors * coeffs.c[j];
  return taps;
}

ChannelRealization synthesize_exact_bem_channel(const BemCoefficients& coeffs,
                                                const BemBasis& basis, const SystemConfig& cfg) {
  if (coeffs.n_symbols() != cfg.n_symbols || coeffs.order() != basis.order ||
      coeffs.delay_taps() != cfg.delay_taps || basis.n_samples != cfg.n_subcarriers) {
    throw std::invalid_argument("synthesize_exact_bem_channel: shape mismatch");
  }
  ChannelRealization real;
  real.n_subcarriers = cfg.n_subcarriers;
  real.cp_length = cfg.cp_length;
  real.delay_taps = cfg.delay_taps;
  real.sparsity = cfg.sparsity;
  real.n_symbols = cfg.n_symbols;
  real.seed = cfg.seed;
  real.support = coeffs.active_taps();

  const int Q = basis.order;
  const int span = cfg.symbol_length();
  CMatrix extended(span, Q);
  for (int t = 0; t < span; ++t) {
    for (int q = 0; q < Q; ++q) extended(t, q) = basis_value(cfg.n_subcarriers, Q, t - cfg.cp_length, q);
  }
  real.gains = CMatrix::Zero(cfg.frame_length(), cfg.delay_taps);
  for (int j = 0; j < cfg.n_symbols; ++j) {
    real.gains.middleRows(j * span, span) = extended * coeffs.c[j];
  }
  return real;
}

CVector frequency_response(const Eigen::Ref<const CVector>& taps, int n_subcarriers) {
  CVector padded = CVector::Zero(n_subcarriers);
  padded.head(taps.size()) = taps;
  return dft_unitary(padded) * std::sqrt(static_cast<double>(n_subcarriers));
}

CircularBandMatrix frequency_channel_band(const BemCoefficients& coeffs, int n_subcarriers, int j) {
  if (j < 0 || j >= coeffs.n_symbols()) throw std::out_of_range("frequency_channel_band: symbol");
  const int Q = coeffs.order();
  const int h = (Q - 1) / 2;
  const int N = n_subcarriers;
  CircularBandMatrix band(N, h);
  for (int q = 0; q < Q; ++q) {
    const int tone = q - h;
    const CVector lambda = frequency_response(coeffs.c[j].row(q).transpose(), N);
    // shifting by `tone` places lambda[(m - tone) mod N] at (m, m - tone)
    for (int m = 0; m < N; ++m) band.diag(-tone, m) += lambda(((m - tone) % N + N) % N);
  }
  return band;
}

CMatrix frequency_channel_matrix(const BemCoefficients& coeffs, const SystemConfig& cfg, int j) {
  return frequency_channel_band(coeffs, cfg.n_subcarriers, j).to_dense();
}

ModelingError modeling_error(const ChannelRealization& real, const BemCoefficients& coeffs,
                             const BemBasis& basis) {
  const TapTrajectories truth = data_taps(real);
  const TapTrajectories model = reconstruct_taps(coeffs, basis);
  ModelingError result;
  double err_total = 0.0, ref_total = 0.0;
  for (int l = 0; l < real.delay_taps; ++l) {
    double ref = 0.0, err = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      ref += truth[j].col(l).squaredNorm();
      err += (truth[j].col(l) - model[j].col(l)).squaredNorm();
    }
    if (ref == 0.0) continue;
    result.taps.push_back(l);
    result.per_tap_db.push_back(to_db(err / ref));
    err_total += err;
    ref_total += ref;
  }
  if (ref_total == 0.0) throw std::domain_error("modeling_error: all-zero channel");
  result.aggregate_db = to_db(err_total / ref_total);
  return result;
}

void write_coefficients_csv(const BemCoefficients& coeffs, std::ostream& out) {
  out << "j,q,l,re,im\n" << std::setprecision(17);
  for (int j = 0; j < coeffs.n_symbols(); ++j) {
    for (int q = 0; q < coeffs.order(); ++q) {
      for (int l = 0; l < coeffs.delay_taps(); ++l) {
        const cplx v = coeffs(j, q, l);
        out << j << ',' << q << ',' << l << ',' << v.real() << ',' << v.imag() << '\n';
      }
    }
  }
}

}  // namespace sdcs
