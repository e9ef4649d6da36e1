#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace sdcs {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// Per-symbol channel tap trajectories over the data portion: taps[j] is N x L.
using TapTrajectories = std::vector<CMatrix>;

/// Floor used whenever a dB value would be -inf.
inline constexpr double kDbFloor = -200.0;

}  // namespace sdcs
