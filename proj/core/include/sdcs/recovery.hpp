#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdcs/bem.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/types.hpp"

namespace sdcs {

/// Raised when the least-squares problem on the selected columns loses rank.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// G x Q matrix whose column q holds the received values at pilot subset P_q.
struct DecoupledObservations {
  CMatrix values;
};

DecoupledObservations decouple(const RxFrame& rx, const PilotPattern& pattern);

/// Rows j L + l (stacked per-symbol coefficient vectors) -> rows l J + j.
CMatrix rearrange_c_to_s(const CMatrix& stacked, int n_symbols, int delay_taps);
CMatrix rearrange_s_to_c(const CMatrix& stacked, int n_symbols, int delay_taps);

enum class Recovery { bsomp, somp, omp };

const char* to_string(Recovery algorithm);

struct SparseEstimate {
  CMatrix s;                          // (J L) x Q, s-ordering
  std::vector<int> support;           // sorted tap indices carrying nonzero rows
  std::vector<int> selected;          // selected blocks (bsomp) or columns, in order
  std::vector<double> residual_norms; // Frobenius residual, before and after each iteration
  Recovery algorithm = Recovery::bsomp;
  int n_symbols = 1;
};

/// Greedy pursuit over contiguous column blocks of `phi`. Each iteration picks
/// the unselected block whose orthogonal projection leaves the smallest
/// Frobenius residual (ties to the lowest index), then re-solves least squares
/// on every selected column. block_size = 1 gives SOMP (OMP when y has one column).
struct PursuitResult {
  CMatrix coefficients;               // phi.cols() x y.cols()
  std::vector<int> selected;          // block indices in selection order
  std::vector<double> residual_norms;
};

PursuitResult block_pursuit(const CMatrix& y, const CMatrix& phi, int block_size, int iterations);

/// phi (phi^H phi)^{-1} phi^H r via QR.
CMatrix project_onto(const CMatrix& phi, const CMatrix& r);

/// Block-based simultaneous OMP: K iterations over J-column tap blocks.
SparseEstimate bsomp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity);
/// Simultaneous OMP selecting K J individual columns shared by all Q observations.
SparseEstimate somp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity);
/// Independent OMP per observation column, K J columns each.
SparseEstimate omp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity);

SparseEstimate recover(Recovery algorithm, const DecoupledObservations& y,
                       const MeasurementMatrix& phi, int sparsity);

/// S (s-ordering) -> c^(j)[q, l].
BemCoefficients coefficients_from_sparse(const SparseEstimate& estimate, int delay_taps);
/// c^(j)[q, l] -> S in s-ordering; Y_mat = Phi S for exact-BEM channels.
CMatrix sparse_from_coefficients(const BemCoefficients& coeffs);

enum class Smoothing { none, single_symbol, multi_symbol };

struct ChannelEstimate {
  TapTrajectories taps;     // final (possibly smoothed) trajectories
  BemCoefficients coeffs;   // recovered CE-BEM coefficients
  SparseEstimate sparse;
};

/// decouple -> recover -> rearrange -> reconstruct -> smooth, for a frame whose
/// pattern spans all of its symbols.
ChannelEstimate estimate_channel(const RxFrame& rx, const PilotPattern& pattern,
                                 const MeasurementMatrix& phi, const BemBasis& basis,
                                 const SystemConfig& cfg, Recovery algorithm, Smoothing smoothing);

/// Symbol-by-symbol estimation with a one-symbol pattern repeated in every symbol.
std::vector<ChannelEstimate> estimate_channel_per_symbol(const RxFrame& rx,
                                                         const PilotPattern& symbol_pattern,
                                                         const MeasurementMatrix& phi,
                                                         const BemBasis& basis,
                                                         const SystemConfig& cfg,
                                                         Recovery algorithm, Smoothing smoothing);

/// CSV rows (l, j, q, re, im) followed by a "support,..." line.
void write_estimate_csv(const SparseEstimate& estimate, int delay_taps, std::ostream& out);

}  // namespace sdcs
