#pragma once

#include <complex>

#include <Eigen/Dense>

namespace camel {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

/// Default tolerance for eigenvalue counting on the unit circle.
inline constexpr double kSpectralTol = 1e-9;

/// Residue allowed when an index formula is rounded to an integer.
inline constexpr double kIntegralityTol = 1e-6;

/// i^k for integer k, computed exactly.
inline cplx ipow(int k)
{
    switch(((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

} // namespace camel
