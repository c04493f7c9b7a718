#pragma once

#include <complex>

#include <Eigen/Core>

namespace incstab {

using Scalar = double;
using Complex = std::complex<Scalar>;
using Index = Eigen::Index;

using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr Scalar kPi = 3.14159265358979323846264338327950288;

}  // namespace incstab
