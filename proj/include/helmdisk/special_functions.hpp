#ifndef HELMDISK_SPECIAL_FUNCTIONS_HPP
#define HELMDISK_SPECIAL_FUNCTIONS_HPP

#include "types.hpp"

namespace helmdisk {

// Cylinder Bessel functions of order 0 and 1 for real positive argument.
// Ascending series below the crossover, Hankel asymptotic expansion above;
// both accumulated in extended precision. Relative error <= 1e-12 on (0, 700].
Real bessel_j0(Real z);
Real bessel_y0(Real z);
Real bessel_j1(Real z);
Real bessel_y1(Real z);

/// H0^(1)(z) = J0(z) + i Y0(z). Throws std::domain_error for z <= 0.
Complex hankel1_0(Real z);
/// H1^(1)(z) = J1(z) + i Y1(z). Throws std::domain_error for z <= 0.
Complex hankel1_1(Real z);

/// Both Hankel functions at once (shared series work).
struct HankelPair {
  Complex h0;
  Complex h1;
};
HankelPair hankel1_01(Real z);

/// Fundamental solution of (Lap + k^2) u = delta in 2-D:
/// Gamma^k(z,x) = -(i/4) H0^(1)(k |z-x|). Symmetric in (z,x).
Complex gamma_k(Real k, const Point2& z, const Point2& x);

/// Gradient of Gamma^k in the second argument x.
CVec2 gamma_k_grad(Real k, const Point2& z, const Point2& x);

/// Hessian of Gamma^k in the second argument x.
/// Trace equals -k^2 Gamma^k away from the source.
CMat2 gamma_k_hessian(Real k, const Point2& z, const Point2& x);

} // namespace helmdisk

#endif
