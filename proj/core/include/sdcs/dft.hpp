#pragma once

#include "sdcs/types.hpp"

namespace sdcs {

/// Unitary DFT: X[k] = 1/sqrt(N) * sum_n x[n] exp(-j 2 pi n k / N).
CVector dft_unitary(const CVector& x);

/// Inverse of dft_unitary.
CVector idft_unitary(const CVector& X);

/// Dense unitary DFT matrix F_N; intended for tests and small N.
CMatrix dft_matrix(int n);

}  // namespace sdcs
