#include "sdcs/recovery.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include "sdcs/smooth.hpp"

namespace sdcs {

namespace {

struct BlockProjector {
  CMatrix basis;  // orthonormal columns spanning the block, G x rank
};

Eigen::ColPivHouseholderQR<CMatrix> factor(const CMatrix& a) {
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  return qr;
}

}  // namespace

const char* to_string(Recovery algorithm) {
  switch (algorithm) {
    case Recovery::bsomp: return "bsomp";
    case Recovery::somp: return "somp";
    case Recovery::omp: return "omp";
  }
  return "?";
}

DecoupledObservations decouple(const RxFrame& rx, const PilotPattern& pattern) {
  if (rx.n_symbols() != pattern.n_symbols || rx.n_subcarriers() != pattern.n_subcarriers) {
    throw std::invalid_argument("decouple: frame and pattern dimensions differ");
  }
  DecoupledObservations obs;
  obs.values.resize(pattern.clusters(), pattern.order);
  for (int q = 0; q < pattern.order; ++q) {
    for (int g = 0; g < pattern.clusters(); ++g) obs.values(g, q) = rx.at(pattern.subsets[q][g]);
  }
  return obs;
}

CMatrix rearrange_c_to_s(const CMatrix& stacked, int n_symbols, int delay_taps) {
  if (stacked.rows() != static_cast<Eigen::Index>(n_symbols) * delay_taps) {
    throw std::invalid_argument("rearrange_c_to_s: row count");
  }
  CMatrix out(stacked.rows(), stacked.cols());
  for (int j = 0; j < n_symbols; ++j) {
    for (int l = 0; l < delay_taps; ++l) out.row(l * n_symbols + j) = stacked.row(j * delay_taps + l);
  }
  return out;
}

CMatrix rearrange_s_to_c(const CMatrix& stacked, int n_symbols, int delay_taps) {
  if (stacked.rows() != static_cast<Eigen::Index>(n_symbols) * delay_taps) {
    throw std::invalid_argument("rearrange_s_to_c: row count");
  }
  CMatrix out(stacked.rows(), stacked.cols());
  for (int j = 0; j < n_symbols; ++j) {
    for (int l = 0; l < delay_taps; ++l) out.row(j * delay_taps + l) = stacked.row(l * n_symbols + j);
  }
  return out;
}

CMatrix project_onto(const CMatrix& phi, const CMatrix& r) {
  const auto qr = factor(phi);
  return phi * qr.solve(r);
}

PursuitResult block_pursuit(const CMatrix& y, const CMatrix& phi, int block_size, int iterations) {
  if (block_size < 1 || phi.cols() % block_size != 0) {
    throw std::invalid_argument("block_pursuit: columns must split into whole blocks");
  }
  if (y.rows() != phi.rows()) throw std::invalid_argument("block_pursuit: row mismatch");
  const int blocks = static_cast<int>(phi.cols() / block_size);
  if (iterations < 0 || iterations > blocks) {
    throw std::invalid_argument("block_pursuit: iteration count exceeds block count");
  }
  if (static_cast<Eigen::Index>(iterations) * block_size > phi.rows()) {
    throw std::invalid_argument("block_pursuit: " + std::to_string(iterations * block_size) +
                                " unknowns exceed " + std::to_string(phi.rows()) + " observations");
  }

  // Per-block projectors depend only on phi, so they are formed once.
  std::vector<BlockProjector> projectors(blocks);
  std::vector<char> eligible(blocks, 1);
  for (int b = 0; b < blocks; ++b) {
    const CMatrix block = phi.middleCols(static_cast<Eigen::Index>(b) * block_size, block_size);
    const auto qr = factor(block);
    const auto rank = qr.rank();
    if (rank == 0) {
      eligible[b] = 0;
      continue;
    }
    const CMatrix q = qr.householderQ();
    projectors[b].basis = q.leftCols(rank);
  }

  PursuitResult result;
  result.coefficients = CMatrix::Zero(phi.cols(), y.cols());
  CMatrix residual = y;
  result.residual_norms.push_back(residual.norm());
  std::vector<char> chosen(blocks, 0);
  CMatrix selected_cols(phi.rows(), 0);
  CMatrix solution;

  for (int it = 0; it < iterations; ++it) {
    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (int b = 0; b < blocks; ++b) {
      if (chosen[b] || !eligible[b]) continue;
      const CMatrix& u = projectors[b].basis;
      const double err = (residual - u * (u.adjoint() * residual)).squaredNorm();
      if (err < best_err) {
        best_err = err;
        best = b;
      }
    }
    if (best < 0) throw RankDeficientError(it, "block_pursuit: no eligible block at iteration " + std::to_string(it));
    chosen[best] = 1;
    result.selected.push_back(best);

    const auto old_cols = selected_cols.cols();
    selected_cols.conservativeResize(Eigen::NoChange, old_cols + block_size);
    selected_cols.rightCols(block_size) =
        phi.middleCols(static_cast<Eigen::Index>(best) * block_size, block_size);
    const auto qr = factor(selected_cols);
    if (qr.rank() < selected_cols.cols()) {
      throw RankDeficientError(it, "block_pursuit: selected columns rank-deficient at iteration " +
                                       std::to_string(it));
    }
    solution = qr.solve(y);
    residual = y - selected_cols * solution;
    result.residual_norms.push_back(residual.norm());
  }

  for (std::size_t k = 0; k < result.selected.size(); ++k) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(result.selected[k]) * block_size;
    result.coefficients.middleRows(row0, block_size) =
        solution.middleRows(static_cast<Eigen::Index>(k) * block_size, block_size);
  }
  return result;
}

namespace {

SparseEstimate to_estimate(PursuitResult&& pursuit, Recovery algorithm, int n_symbols) {
  SparseEstimate est;
  est.s = std::move(pursuit.coefficients);
  est.selected = std::move(pursuit.selected);
  est.residual_norms = std::move(pursuit.residual_norms);
  est.algorithm = algorithm;
  est.n_symbols = n_symbols;
  if (algorithm == Recovery::bsomp) {
    est.support = est.selected;
    std::sort(est.support.begin(), est.support.end());
  } else {
    std::set<int> taps;
    for (int col : est.selected) taps.insert(col / n_symbols);
    est.support.assign(taps.begin(), taps.end());
  }
  return est;
}

}  // namespace

SparseEstimate bsomp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity) {
  return to_estimate(block_pursuit(y.values, phi.phi, phi.n_symbols, sparsity), Recovery::bsomp,
                     phi.n_symbols);
}

SparseEstimate somp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity) {
  return to_estimate(block_pursuit(y.values, phi.phi, 1, sparsity * phi.n_symbols), Recovery::somp,
                     phi.n_symbols);
}

SparseEstimate omp(const DecoupledObservations& y, const MeasurementMatrix& phi, int sparsity) {
  SparseEstimate est;
  est.algorithm = Recovery::omp;
  est.n_symbols = phi.n_symbols;
  est.s = CMatrix::Zero(phi.phi.cols(), y.values.cols());
  for (Eigen::Index q = 0; q < y.values.cols(); ++q) {
    auto column = block_pursuit(y.values.col(q), phi.phi, 1, sparsity * phi.n_symbols);
    est.s.col(q) = column.coefficients;
    est.selected.insert(est.selected.end(), column.selected.begin(), column.selected.end());
    if (q == 0) est.residual_norms = column.residual_norms;
  }
  std::set<int> taps;
  for (int col : est.selected) taps.insert(col / phi.n_symbols);
  est.support.assign(taps.begin(), taps.end());
  return est;
}

SparseEstimate recover(Recovery algorithm, const DecoupledObservations& y,
                       const MeasurementMatrix& phi, int sparsity) {
  switch (algorithm) {
    case Recovery::bsomp: return bsomp(y, phi, sparsity);
    case Recovery::somp: return somp(y, phi, sparsity);
    case Recovery::omp: return omp(y, phi, sparsity);
  }
  throw std::invalid_argument("recover: unknown algorithm");
}

BemCoefficients coefficients_from_sparse(const SparseEstimate& estimate, int delay_taps) {
  const int J = estimate.n_symbols;
  const int Q = static_cast<int>(estimate.s.cols());
  const CMatrix stacked = rearrange_s_to_c(estimate.s, J, delay_taps);
  BemCoefficients coeffs(J, Q, delay_taps);
  for (int j = 0; j < J; ++j) {
    coeffs.c[j] = stacked.middleRows(static_cast<Eigen::Index>(j) * delay_taps, delay_taps).transpose();
  }
  return coeffs;
}

CMatrix sparse_from_coefficients(const BemCoefficients& coeffs) {
  const int J = coeffs.n_symbols();
  const int L = coeffs.delay_taps();
  CMatrix stacked(static_cast<Eigen::Index>(J) * L, coeffs.order());
  for (int j = 0; j < J; ++j) {
    stacked.middleRows(static_cast<Eigen::Index>(j) * L, L) = coeffs.c[j].transpose();
  }
  return rearrange_c_to_s(stacked, J, L);
}

ChannelEstimate estimate_channel(const RxFrame& rx, const PilotPattern& pattern,
                                 const MeasurementMatrix& phi, const BemBasis& basis,
                                 const SystemConfig& cfg, Recovery algorithm, Smoothing smoothing) {
  ChannelEstimate est;
  est.sparse = recover(algorithm, decouple(rx, pattern), phi, cfg.sparsity);
  est.coeffs = coefficients_from_sparse(est.sparse, phi.delay_taps);
  est.taps = reconstruct_taps(est.coeffs, basis);
  switch (smoothing) {
    case Smoothing::none:
      break;
    case Smoothing::single_symbol:
      for (auto& t : est.taps) t = smooth_single_symbol(t);
      break;
    case Smoothing::multi_symbol:
      est.taps = smooth_multi_symbol(est.taps, cfg.cp_length);
      break;
  }
  return est;
}

std::vector<ChannelEstimate> estimate_channel_per_symbol(const RxFrame& rx,
                                                         const PilotPattern& symbol_pattern,
                                                         const MeasurementMatrix& phi,
                                                         const BemBasis& basis,
                                                         const SystemConfig& cfg,
                                                         Recovery algorithm, Smoothing smoothing) {
  if (symbol_pattern.n_symbols != 1) {
    throw std::invalid_argument("estimate_channel_per_symbol: needs a one-symbol pattern");
  }
  if (smoothing == Smoothing::multi_symbol) {
    throw std::invalid_argument("estimate_channel_per_symbol: multi-symbol smoothing needs J >= 2");
  }
  SystemConfig single = cfg;
  single.n_symbols = 1;
  std::vector<ChannelEstimate> out;
  for (int j = 0; j < rx.n_symbols(); ++j) {
    RxFrame one;
    one.symbols = rx.symbols.row(j);
    one.snr_db = rx.snr_db;
    one.noise_variance = rx.noise_variance;
    out.push_back(estimate_channel(one, symbol_pattern, phi, basis, single, algorithm, smoothing));
  }
  return out;
}

void write_estimate_csv(const SparseEstimate& estimate, int delay_taps, std::ostream& out) {
  const int J = estimate.n_symbols;
  out << "l,j,q,re,im\n" << std::setprecision(17);
  for (int l = 0; l < delay_taps; ++l) {
    for (int j = 0; j < J; ++j) {
      for (Eigen::Index q = 0; q < estimate.s.cols(); ++q) {
        const cplx v = estimate.s(l * J + j, q);
        out << l << ',' << j << ',' << q << ',' << v.real() << ',' << v.imag() << '\n';
      }
    }
  }
  out << "support";
  for (int l : estimate.support) out << ',' << l;
  out << '\n';
}

}  // namespace sdcs
