#ifndef HELMDISK_TYPES_HPP
#define HELMDISK_TYPES_HPP

#include <Eigen/Core>
#include <complex>

namespace helmdisk {

using Real    = double;
using Complex = std::complex<Real>;

using Point2  = Eigen::Vector2d;
using CVec2   = Eigen::Vector2cd;
using CMat2   = Eigen::Matrix2cd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kTwoPi = 2.0 * kPi;

/// Euler-Mascheroni constant.
inline constexpr Real kEulerGamma = 0.57721566490153286061;

inline constexpr Complex kImag{0.0, 1.0};

} // namespace helmdisk

#endif
