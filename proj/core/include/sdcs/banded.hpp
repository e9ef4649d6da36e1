#pragma once

#include <stdexcept>
#include <string>

#include "sdcs/types.hpp"

namespace sdcs {

/// Raised when a banded system has no usable pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// N x N matrix whose nonzeros lie on the circular diagonals
/// (m, (m + d) mod N) for |d| <= half_bandwidth.
class CircularBandMatrix {
 public:
  CircularBandMatrix() = default;
  CircularBandMatrix(int n, int half_bandwidth);

  int size() const { return n_; }
  int half_bandwidth() const { return half_; }

  /// Entry on circular diagonal d of row m: A(m, (m + d) mod N).
  cplx& diag(int d, int m) { return diags_(d + half_, m); }
  const cplx& diag(int d, int m) const { return diags_(d + half_, m); }

  CMatrix to_dense() const;
  CVector operator*(const CVector& x) const;

  static CircularBandMatrix from_dense(const CMatrix& a, int half_bandwidth);

 private:
  int n_ = 0;
  int half_ = 0;
  CMatrix diags_;  // (2h + 1) x N
};

/// Solves A x = y. The interleaving permutation 0, N-1, 1, N-2, ... turns the
/// circular band into an ordinary band of half-width 2h, which is then
/// factored by band LU with partial pivoting. Throws SingularMatrixError.
CVector solve_circular_banded(const CircularBandMatrix& a, const CVector& y);

}  // namespace sdcs
