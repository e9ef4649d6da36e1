#include "sdcs/dft.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace sdcs {

CVector dft_unitary(const CVector& x) {
  const auto n = x.size();
  std::vector<cplx> in(x.data(), x.data() + n);
  std::vector<cplx> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  CVector X = Eigen::Map<CVector>(out.data(), n);
  return X / std::sqrt(static_cast<double>(n));
}

CVector idft_unitary(const CVector& X) {
  const auto n = X.size();
  std::vector<cplx> in(X.data(), X.data() + n);
  std::vector<cplx> out;
  Eigen::FFT<double> fft;
  fft.inv(out, in);  // includes the 1/N factor
  CVector x = Eigen::Map<CVector>(out.data(), n);
  return x * std::sqrt(static_cast<double>(n));
}

CMatrix dft_matrix(int n) {
  CMatrix F(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const auto k = static_cast<double>((static_cast<long long>(r) * c) % n);
      F(r, c) = std::polar(scale, -2.0 * kPi * k / n);
    }
  }
  return F;
}

}  // namespace sdcs
