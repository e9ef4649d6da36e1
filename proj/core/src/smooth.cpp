#include "sdcs/smooth.hpp"

#include <stdexcept>

namespace sdcs {

CMatrix smooth_single_symbol(const CMatrix& taps) {
  const auto N = taps.rows();
  if (N < 2 || N % 2 != 0) throw std::invalid_argument("smooth_single_symbol: N must be even");
  const auto half = N / 2;
  const double quarter = static_cast<double>(N) / 4.0;
  CMatrix out(N, taps.cols());
  for (Eigen::Index l = 0; l < taps.cols(); ++l) {
    const cplx ave1 = taps.col(l).head(half).mean();
    const cplx ave2 = taps.col(l).tail(half).mean();
    const cplx slope = (ave2 - ave1) / static_cast<double>(half);
    for (Eigen::Index n = 0; n < N; ++n) {
      out(n, l) = (static_cast<double>(n) + 1.0 - quarter) * slope + ave1;
    }
  }
  return out;
}

TapTrajectories smooth_multi_symbol(const TapTrajectories& taps, int cp_length) {
  const int J = static_cast<int>(taps.size());
  if (J < 2) {
    throw std::invalid_argument(
        "smooth_multi_symbol: needs at least two symbols; use smooth_single_symbol");
  }
  const auto N = taps.front().rows();
  const auto L = taps.front().cols();
  const double pitch = static_cast<double>(N + cp_length);
  const double halfN = static_cast<double>(N) / 2.0;

  std::vector<Eigen::RowVectorXcd> mean(J);
  for (int j = 0; j < J; ++j) {
    if (taps[j].rows() != N || taps[j].cols() != L) {
      throw std::invalid_argument("smooth_multi_symbol: ragged trajectories");
    }
    mean[j] = taps[j].colwise().mean();
  }
  // slope[j] joins symbol j and j + 1
  std::vector<Eigen::RowVectorXcd> slope(J - 1);
  for (int j = 0; j + 1 < J; ++j) slope[j] = (mean[j + 1] - mean[j]) / pitch;

  TapTrajectories out(J, CMatrix(N, L));
  for (int j = 0; j < J; ++j) {
    const bool has_prev = j > 0;
    const bool has_next = j + 1 < J;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double t = static_cast<double>(n);
      for (Eigen::Index l = 0; l < L; ++l) {
        cplx r1{0.0, 0.0}, r2{0.0, 0.0};
        if (has_prev) r1 = (t + cp_length + 1.0 + halfN) * slope[j - 1](l) + mean[j - 1](l);
        if (has_next) r2 = (t + 1.0 - halfN) * slope[j](l) + mean[j](l);
        if (has_prev && has_next) out[j](n, l) = 0.5 * (r1 + r2);
        else out[j](n, l) = has_prev ? r1 : r2;
      }
    }
  }
  return out;
}

}  // namespace sdcs
