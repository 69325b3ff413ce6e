#include "helmdisk/quadrature.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace helmdisk {

Complex periodic_trapezoid(const CVector& samples) {
  if (samples.size() == 0) throw std::invalid_argument("helmdisk: periodic_trapezoid needs samples");
  return kTwoPi / static_cast<Real>(samples.size()) * samples.sum();
}

LogQuadWeights make_log_weights(const std::vector<Real>& grid, int singular_index) {
  const int n = static_cast<int>(grid.size());
  if (n < 3) throw std::invalid_argument("helmdisk: log weights need at least 3 nodes");
  if (singular_index <= 0 || singular_index >= n - 1) {
    throw std::invalid_argument("helmdisk: singular node must be interior");
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(grid[i + 1] > grid[i])) {
      throw std::invalid_argument("helmdisk: log weight grid must be strictly increasing");
    }
  }
  LogQuadWeights w;
  w.grid = grid;
  w.singular_index = singular_index;
  w.weights.resize(n);
  const Real tstar = grid[singular_index];
  for (int i = 0; i < n; ++i) {
    if (i == singular_index) {
      const Real dm = grid[i + 1] - grid[i];
      const Real dm1 = grid[i] - grid[i - 1];
      w.weights[i] = 0.5 * (std::log(dm) + std::log(dm1) - 4.0);
    } else {
      w.weights[i] = std::log(std::abs(grid[i] - tstar));
    }
  }
  return w;
}

Complex log_trapezoid(const CVector& f, const LogQuadWeights& w) {
  const int n = static_cast<int>(w.grid.size());
  if (f.size() != n) throw std::invalid_argument("helmdisk: log_trapezoid sample count mismatch");
  // The interior nodes carry the forward gap D_i = t_{i+1} - t_i; the final
  // endpoint reuses D_{N-1} (the printed rule leaves D_N undefined).
  Complex acc = 0.5 * f[0] * w.weights[0] * (w.grid[1] - w.grid[0]);
  for (int i = 1; i < n - 1; ++i) {
    acc += f[i] * w.weights[i] * (w.grid[i + 1] - w.grid[i]);
  }
  acc += 0.5 * f[n - 1] * w.weights[n - 1] * (w.grid[n - 1] - w.grid[n - 2]);
  return acc;
}

Complex log_trapezoid(const CVector& f, int singular_index) {
  const int n = static_cast<int>(f.size());
  std::vector<Real> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = static_cast<Real>(i) / (n - 1);
  return log_trapezoid(f, make_log_weights(grid, singular_index));
}

FourierSeries fourier_project(const CVector& samples, int modes) {
  const int n = static_cast<int>(samples.size());
  if (n < 2 * modes + 2) {
    throw std::invalid_argument("helmdisk: fourier_project needs N_f >= 2 M + 2");
  }
  Eigen::FFT<Real> fft;
  std::vector<Complex> in(samples.data(), samples.data() + n);
  std::vector<Complex> out(n);
  fft.fwd(out, in);  // X_m = sum_j f_j e^{-2 pi i j m / n}

  // Samples live at t_j = -pi + 2 pi j / n, so sum_j f_j e^{i m t_j} = (-1)^m X_{(n-m) % n}.
  FourierSeries s;
  s.cos_coeff.setZero(modes + 1);
  s.sin_coeff.setZero(modes + 1);
  s.cos_coeff[0] = out[0] / static_cast<Real>(n);
  for (int m = 1; m <= modes; ++m) {
    const Real sign = (m % 2 == 0) ? 1.0 : -1.0;
    const Complex ap = sign * out[(n - m) % n];  // sum f_j e^{+i m t_j}
    const Complex am = sign * out[m];            // sum f_j e^{-i m t_j}
    s.cos_coeff[m] = (ap + am) / static_cast<Real>(n);
    s.sin_coeff[m] = (ap - am) / (Complex(0.0, 1.0) * static_cast<Real>(n));
  }
  return s;
}

Complex fourier_synth(const FourierSeries& s, Real t) {
  Complex acc = s.cos_coeff[0];
  for (int m = 1; m <= s.modes(); ++m) {
    acc += s.cos_coeff[m] * std::cos(m * t) + s.sin_coeff[m] * std::sin(m * t);
  }
  return acc;
}

CVector fourier_synth_grid(const FourierSeries& s, int nf) {
  const int modes = s.modes();
  if (nf < 2 * modes + 2) throw std::invalid_argument("helmdisk: synth grid too coarse");
  // Build the spectrum of the DFT over t_j = -pi + 2 pi j / nf and invert.
  std::vector<Complex> spec(nf, Complex(0.0, 0.0));
  spec[0] = s.cos_coeff[0] * static_cast<Real>(nf);
  for (int m = 1; m <= modes; ++m) {
    const Real sign = (m % 2 == 0) ? 1.0 : -1.0;
    const Complex ap = 0.5 * (s.cos_coeff[m] - kImag * s.sin_coeff[m]);  // e^{+imt} amplitude
    const Complex am = 0.5 * (s.cos_coeff[m] + kImag * s.sin_coeff[m]);  // e^{-imt} amplitude
    spec[m] += sign * ap * static_cast<Real>(nf);
    spec[(nf - m) % nf] += sign * am * static_cast<Real>(nf);
  }
  Eigen::FFT<Real> fft;
  std::vector<Complex> out(nf);
  fft.inv(out, spec);
  return Eigen::Map<CVector>(out.data(), nf);
}

RVector log_kernel_fourier(Real big_r, Real small_r, int n_max) {
  if (!(big_r > small_r) || !(small_r > 0.0)) {
    throw std::invalid_argument("helmdisk: log_kernel_fourier needs R > r > 0");
  }
  RVector c(n_max + 1);
  c[0] = std::log(big_r / (2.0 * small_r)) / kTwoPi;
  const Real rho = small_r / big_r;
  Real pw = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    pw *= rho;
    c[n] = -pw / (kPi * n);
  }
  return c;
}

Real poisson_derivative_convolution(Real big_r, Real small_r, int n) {
  if (!(big_r > small_r) || !(small_r > 0.0) || n < 0) {
    throw std::invalid_argument("helmdisk: poisson_derivative_convolution needs R > r > 0, n >= 0");
  }
  if (n == 0) return 0.0;
  return n / (2.0 * big_r * small_r) * std::pow(small_r / big_r, n);
}

Real poisson_convolution(Real big_r, Real small_r, int n) {
  if (!(big_r > small_r) || !(small_r > 0.0) || n < 0) {
    throw std::invalid_argument("helmdisk: poisson_convolution needs R > r > 0, n >= 0");
  }
  if (n == 0) return 0.0;
  return -std::pow(small_r / big_r, n) / (2.0 * small_r);
}

namespace {

// Shared driver: integrate kernel(t_x - t) * cos(n (t_z - t)) over [-pi, pi)
// and report the coefficient in front of cos(n (t_z - t_x)). The integral is
// proportional to cos(n(t_z - t_x)); evaluating at t_x = 0, t_z = 0 isolates
// the coefficient.
template <class Kernel>
Real convolution_coefficient(Kernel&& kernel, int n, int n_quad) {
  CVector samples(n_quad);
  for (int j = 0; j < n_quad; ++j) {
    const Real t = -kPi + kTwoPi * j / n_quad;
    samples[j] = kernel(-t) * std::cos(n * (-t));
  }
  return periodic_trapezoid(samples).real();
}

} // namespace

Real poisson_derivative_convolution_quadrature(Real big_r, Real small_r, int n, int n_quad) {
  const Real r2 = big_r * big_r + small_r * small_r;
  auto kernel = [&](Real th) {
    const Real den = r2 - 2.0 * big_r * small_r * std::cos(th);
    return -(2.0 * big_r * small_r - r2 * std::cos(th)) / (kTwoPi * den * den);
  };
  return convolution_coefficient(kernel, n, n_quad);
}

Real poisson_convolution_quadrature(Real big_r, Real small_r, int n, int n_quad) {
  const Real r2 = big_r * big_r + small_r * small_r;
  auto kernel = [&](Real th) {
    return (small_r - big_r * std::cos(th)) / (kTwoPi * (r2 - 2.0 * big_r * small_r * std::cos(th)));
  };
  return convolution_coefficient(kernel, n, n_quad);
}

Real appendix_a_identity(Real big_r, Real small_r, Real tau) {
  if (!(big_r > small_r) || !(small_r > 0.0)) {
    throw std::invalid_argument("helmdisk: appendix_a_identity needs R > r > 0");
  }
  const Real r2 = small_r * small_r, R2 = big_r * big_r;
  const Real num = r2 * (R2 * std::cos(tau) - r2);
  const Real den = R2 * R2 + r2 * r2 - 2.0 * R2 * r2 * std::cos(tau);
  return num / (kTwoPi * big_r * den);
}

Real appendix_a_lhs_quadrature(Real big_r, Real small_r, Real tau, int n_quad) {
  // t_x = 0, t_z = tau.
  const Real r2 = big_r * big_r + small_r * small_r;
  CVector samples(n_quad);
  for (int j = 0; j < n_quad; ++j) {
    const Real t = -kPi + kTwoPi * j / n_quad;
    const Real den = r2 - 2.0 * big_r * small_r * std::cos(t);
    const Real kern = -(2.0 * big_r * small_r - r2 * std::cos(t)) / (kTwoPi * den * den);
    const Real lg = std::log(r2 / (2.0 * big_r * small_r) - std::cos(tau - t)) / kTwoPi;
    samples[j] = -small_r * kern * lg;
  }
  return periodic_trapezoid(samples).real();
}

RVector log_sin_weights(int n, Real s) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("helmdisk: log_sin_weights needs even n >= 4");
  RVector w(n);
  for (int j = 0; j < n; ++j) {
    const Real tj = -kPi + kTwoPi * j / n;
    Real acc = 0.0;
    for (int m = 1; m < n / 2; ++m) {
      acc += std::cos(m * (s - tj)) / m;
    }
    w[j] = -2.0 * kTwoPi / n * acc - kTwoPi * 2.0 / (static_cast<Real>(n) * n) *
                                         std::cos(n / 2 * (s - tj));
  }
  return w;
}

RVector log_sin_weight_table(int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("helmdisk: weight table needs even n >= 4");
  RVector w(n);
  for (int m = 0; m < n; ++m) {
    const Real th = kTwoPi * m / n;
    Real acc = 0.0;
    for (int l = 1; l < n / 2; ++l) {
      acc += std::cos(l * th) / l;
    }
    w[m] = -2.0 * kTwoPi / n * acc -
           kTwoPi * 2.0 / (static_cast<Real>(n) * n) * std::cos(n / 2 * th);
  }
  return w;
}

} // namespace helmdisk
