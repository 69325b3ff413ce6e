#ifndef HELMDISK_QUADRATURE_HPP
#define HELMDISK_QUADRATURE_HPP

#include "types.hpp"

#include <vector>

namespace helmdisk {

/// Trapezoidal rule for equispaced samples of a 2pi-periodic function on
/// [-pi, pi): (2 pi / N) * sum(samples). Spectrally accurate for smooth f.
Complex periodic_trapezoid(const CVector& samples);

/// Node weights for int_0^1 log|t - t_*| f(t) dt with t_* on the grid.
struct LogQuadWeights {
  std::vector<Real> grid;     // t_1 .. t_N, strictly increasing, t_1 = 0, t_N = 1
  int singular_index = -1;    // m with grid[m] == t_* (0-based, interior)
  std::vector<Real> weights;  // l_i = log|t_i - t_*|, l_m = (log D_m + log D_{m-1} - 4)/2
};

LogQuadWeights make_log_weights(const std::vector<Real>& grid, int singular_index);

/// Composite modified trapezoidal rule for int_0^1 log|t - t_*| f(t) dt.
/// f holds samples on w.grid. Error is O(max_i D_i |log D_i|).
Complex log_trapezoid(const CVector& f, const LogQuadWeights& w);

/// Convenience: equispaced grid with N nodes on [0,1], singular node at index m.
Complex log_trapezoid(const CVector& f, int singular_index);

/// Truncated Fourier series p_0 + sum_n (p_n cos(n t) + q_n sin(n t)).
struct FourierSeries {
  CVector cos_coeff;  // p_0 .. p_M
  CVector sin_coeff;  // q_0 (= 0), q_1 .. q_M

  int modes() const { return static_cast<int>(cos_coeff.size()) - 1; }
};

/// Discrete Fourier projection of samples taken at t_n = -pi + 2 pi n / N_f.
/// Requires N_f >= 2 M + 2. Exact on trigonometric polynomials of degree <= M.
FourierSeries fourier_project(const CVector& samples, int modes);

/// Evaluate the series at an arbitrary angle.
Complex fourier_synth(const FourierSeries& s, Real t);

/// Evaluate the series on the standard N_f grid (FFT-based).
CVector fourier_synth_grid(const FourierSeries& s, int nf);

/// Cosine coefficients of (1/2pi) log((R^2+r^2)/(2 R r) - cos t) for R > r > 0:
/// c_0 = (1/2pi) log(R/(2r)), c_n = -(1/pi) (r/R)^n / n.
RVector log_kernel_fourier(Real big_r, Real small_r, int n_max);

/// Closed form of
///   int_-pi^pi (-1/2pi) (2Rr - (R^2+r^2) cos(t_x - t)) / (R^2+r^2-2Rr cos(t_x-t))^2
///              cos(n (t_z - t)) dt
/// = (n/(2Rr)) (r/R)^n cos(n(t_z - t_x)); this returns the coefficient
/// (n/(2Rr)) (r/R)^n, with 0 at n = 0.
Real poisson_derivative_convolution(Real big_r, Real small_r, int n);

/// Closed form of
///   int_-pi^pi (1/2pi) (r - R cos(t_x - t)) / (R^2+r^2-2Rr cos(t_x-t))
///              cos(n (t_z - t)) dt
/// = -(1/(2r)) (r/R)^n cos(n(t_x - t_z)) for n >= 1 and 0 for n = 0;
/// returns the coefficient.
Real poisson_convolution(Real big_r, Real small_r, int n);

/// Quadrature companions of the two identities above (the integrals evaluated
/// by the periodic trapezoidal rule with n_quad nodes).
Real poisson_derivative_convolution_quadrature(Real big_r, Real small_r, int n, int n_quad);
Real poisson_convolution_quadrature(Real big_r, Real small_r, int n, int n_quad);

/// Closed-form right-hand side of the convolution identity
///   -r int (-1/2pi) (2Rr-(R^2+r^2)cos(t_x-t))/(...)^2 (1/2pi) log((R^2+r^2)/(2Rr)-cos(t_z-t)) dt
/// = (r^2/(2 pi R)) (R^2 cos(tau) - r^2) / (R^4 + r^4 - 2 R^2 r^2 cos(tau)),
/// tau = t_z - t_x.
Real appendix_a_identity(Real big_r, Real small_r, Real tau);

/// The left-hand side evaluated by the periodic trapezoidal rule.
Real appendix_a_lhs_quadrature(Real big_r, Real small_r, Real tau, int n_quad);

/// Kress-style weights R_j(s) for int_-pi^pi log(4 sin^2((s-t)/2)) f(t) dt
/// with nodes t_j = -pi + 2 pi j / n. Exact for trigonometric polynomials of
/// degree < n/2. n must be even.
RVector log_sin_weights(int n, Real s);

/// Circulant weight table W_m = R_j(t_i) for m = (i - j) mod n.
RVector log_sin_weight_table(int n);

} // namespace helmdisk

#endif
