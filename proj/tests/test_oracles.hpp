#ifndef HELMDISK_TEST_ORACLES_HPP
#define HELMDISK_TEST_ORACLES_HPP

// Independent reference solutions used only by the test suites. Everything
// here is built on std::cyl_bessel_jl / std::cyl_neumannl so that it shares
// no code with the library under test.

#include <helmdisk/types.hpp>

#include <complex>
#include <functional>
#include <vector>

namespace helmdisk::testing {

/// Exact sound-hard-disk (Mie series) solutions for a single disk of radius a
/// centered at c. All points are absolute coordinates.
struct MieDisk {
  Point2 center;
  Real radius;
  Real k;

  MieDisk(Point2 c, Real r, Real wavenumber) : center(c), radius(r), k(wavenumber) {}

  /// N(z, x) for z, x strictly outside the closed disk.
  Complex value(const Point2& z, const Point2& x) const;

  /// N(z0, x) with the source on the boundary at angle theta_z, x outside.
  Complex value_source_on(Real theta_z, const Point2& x) const;

  /// Smooth part Ntilde(theta_z, theta_x) for both points on the boundary.
  Complex pair_smooth(Real theta_z, Real theta_x) const;

 private:
  // Cached series coefficients of the smooth on-boundary pair expansion.
  mutable std::vector<std::complex<long double>> beta_;
  const std::vector<std::complex<long double>>& beta_table() const;
};

/// Central finite-difference gradient (step h) of a complex scalar field.
CVec2 fd_gradient(const std::function<Complex(const Point2&)>& f, const Point2& x, Real h);

/// Central finite-difference Laplacian.
Complex fd_laplacian(const std::function<Complex(const Point2&)>& f, const Point2& x, Real h);

} // namespace helmdisk::testing

#endif
