#include "sdcs/banded.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sdcs {

CircularBandMatrix::CircularBandMatrix(int n, int half_bandwidth)
    : n_(n), half_(half_bandwidth), diags_(CMatrix::Zero(2 * half_bandwidth + 1, n)) {
  if (n < 1 || half_bandwidth < 0) throw std::invalid_argument("CircularBandMatrix: bad shape");
  if (2 * half_bandwidth + 1 > n) {
    throw std::invalid_argument("CircularBandMatrix: band wider than matrix");
  }
}

CMatrix CircularBandMatrix::to_dense() const {
  CMatrix a = CMatrix::Zero(n_, n_);
  for (int d = -half_; d <= half_; ++d) {
    for (int m = 0; m < n_; ++m) a(m, ((m + d) % n_ + n_) % n_) += diag(d, m);
  }
  return a;
}

CVector CircularBandMatrix::operator*(const CVector& x) const {
  CVector y = CVector::Zero(n_);
  for (int m = 0; m < n_; ++m) {
    for (int d = -half_; d <= half_; ++d) y(m) += diag(d, m) * x(((m + d) % n_ + n_) % n_);
  }
  return y;
}

CircularBandMatrix CircularBandMatrix::from_dense(const CMatrix& a, int half_bandwidth) {
  const int n = static_cast<int>(a.rows());
  CircularBandMatrix band(n, half_bandwidth);
  for (int d = -half_bandwidth; d <= half_bandwidth; ++d) {
    for (int m = 0; m < n; ++m) band.diag(d, m) = a(m, ((m + d) % n + n) % n);
  }
  return band;
}

namespace {

// position -> original index
std::vector<int> interleave_order(int n) {
  std::vector<int> order(n);
  for (int pos = 0; pos < n; ++pos) order[pos] = (pos % 2 == 0) ? pos / 2 : n - 1 - pos / 2;
  return order;
}

// LAPACK-style general band storage with room for pivoting fill-in.
class BandLu {
 public:
  BandLu(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1),
                                  ab_(static_cast<std::size_t>(n) * width_, cplx{0.0, 0.0}) {}

  // column range stored for row i: [i - kl, i + kl + ku]
  cplx& at(int i, int j) { return ab_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }

  CVector solve(CVector b) {
    double scale = 0.0;
    for (const auto& v : ab_) scale = std::max(scale, std::abs(v));
    const double tiny = scale * 1e-14 * n_;
    for (int k = 0; k < n_; ++k) {
      const int last_row = std::min(n_ - 1, k + kl_);
      const int last_col = std::min(n_ - 1, k + kl_ + ku_);
      int pivot = k;
      double best = std::abs(at(k, k));
      for (int i = k + 1; i <= last_row; ++i) {
        const double mag = std::abs(at(i, k));
        if (mag > best) {
          best = mag;
          pivot = i;
        }
      }
      if (!(best > tiny)) {
        throw SingularMatrixError("banded solve: zero pivot at column " + std::to_string(k));
      }
      if (pivot != k) {
        for (int j = k; j <= last_col; ++j) std::swap(at(k, j), at(pivot, j));
        std::swap(b(k), b(pivot));
      }
      const cplx inv = 1.0 / at(k, k);
      for (int i = k + 1; i <= last_row; ++i) {
        const cplx factor = at(i, k) * inv;
        if (factor == cplx{0.0, 0.0}) continue;
        at(i, k) = 0.0;
        for (int j = k + 1; j <= last_col; ++j) at(i, j) -= factor * at(k, j);
        b(i) -= factor * b(k);
      }
    }
    for (int k = n_ - 1; k >= 0; --k) {
      const int last_col = std::min(n_ - 1, k + kl_ + ku_);
      cplx acc = b(k);
      for (int j = k + 1; j <= last_col; ++j) acc -= at(k, j) * b(j);
      b(k) = acc / at(k, k);
    }
    return b;
  }

 private:
  int n_, kl_, ku_, width_;
  std::vector<cplx> ab_;
};

}  // namespace

CVector solve_circular_banded(const CircularBandMatrix& a, const CVector& y) {
  const int n = a.size();
  if (y.size() != n) throw std::invalid_argument("solve_circular_banded: size mismatch");
  const int h = a.half_bandwidth();
  const auto order = interleave_order(n);
  std::vector<int> position(n);
  for (int pos = 0; pos < n; ++pos) position[order[pos]] = pos;

  const int bw = std::min(2 * h, n - 1);
  BandLu lu(n, bw, bw);
  for (int m = 0; m < n; ++m) {
    for (int d = -h; d <= h; ++d) {
      const int col = ((m + d) % n + n) % n;
      lu.at(position[m], position[col]) += a.diag(d, m);
    }
  }
  CVector rhs(n);
  for (int pos = 0; pos < n; ++pos) rhs(pos) = y(order[pos]);
  const CVector z = lu.solve(rhs);
  CVector x(n);
  for (int pos = 0; pos < n; ++pos) x(order[pos]) = z(pos);
  return x;
}

}  // namespace sdcs
