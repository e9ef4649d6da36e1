#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sdcs/banded.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/types.hpp"

namespace sdcs {

/// Complex-exponential basis: column q is exp(j 2 pi n (q - (Q-1)/2) / N), n in [0, N).
struct BemBasis {
  int n_samples = 0;
  int order = 0;
  CMatrix vectors;                      // N x Q
  Eigen::HouseholderQR<CMatrix> qr;     // of `vectors`, for least-squares fits

  int half_order() const { return (order - 1) / 2; }
};

BemBasis build_basis(int n_samples, int order);

/// Basis exponential evaluated at an arbitrary (possibly negative) local index.
cplx basis_value(int n_samples, int order, int n, int q);

/// c[j](q, l): coefficient of basis q for tap l in symbol j.
struct BemCoefficients {
  std::vector<CMatrix> c;  // J entries, each Q x L

  BemCoefficients() = default;
  BemCoefficients(int n_symbols, int order, int delay_taps);

  int n_symbols() const { return static_cast<int>(c.size()); }
  int order() const { return c.empty() ? 0 : static_cast<int>(c.front().rows()); }
  int delay_taps() const { return c.empty() ? 0 : static_cast<int>(c.front().cols()); }

  cplx& operator()(int j, int q, int l) { return c[j](q, l); }
  const cplx& operator()(int j, int q, int l) const { return c[j](q, l); }

  /// Taps l whose coefficients are nonzero in any (j, q).
  std::vector<int> active_taps() const;
};

/// Least-squares projection of every data-portion tap trajectory onto the basis.
BemCoefficients fit_coefficients(const TapTrajectories& taps, const BemBasis& basis);
BemCoefficients fit_coefficients(const ChannelRealization& real, const BemBasis& basis);

/// h_l^(j) = sum_q b_q c^(j)[q, l].
TapTrajectories reconstruct_taps(const BemCoefficients& coeffs, const BemBasis& basis);

/// Channel with zero modeling error. CP samples evaluate the same exponentials
/// at local indices [-L_cp, -1].
ChannelRealization synthesize_exact_bem_channel(const BemCoefficients& coeffs,
                                                const BemBasis& basis, const SystemConfig& cfg);

/// Frequency response V_L c: lambda[k] = sum_l c[l] exp(-j 2 pi k l / N).
CVector frequency_response(const Eigen::Ref<const CVector>& taps, int n_subcarriers);

/// Banded frequency-domain channel of symbol j: sum_q shift_{q-(Q-1)/2} diag(V_L c_q).
CircularBandMatrix frequency_channel_band(const BemCoefficients& coeffs, int n_subcarriers, int j);
CMatrix frequency_channel_matrix(const BemCoefficients& coeffs, const SystemConfig& cfg, int j);

struct ModelingError {
  std::vector<int> taps;         // active taps (support order)
  std::vector<double> per_tap_db;
  double aggregate_db = 0.0;
};

/// NMSE of reconstruct_taps against the true data-portion taps, active taps only.
/// Throws std::domain_error for an all-zero channel.
ModelingError modeling_error(const ChannelRealization& real, const BemCoefficients& coeffs,
                             const BemBasis& basis);

/// CSV rows (j, q, l, re, im).
void write_coefficients_csv(const BemCoefficients& coeffs, std::ostream& out);

}  // namespace sdcs
