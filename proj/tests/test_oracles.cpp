#include "test_oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace helmdisk::testing {

namespace {

using CLD = std::complex<long double>;

constexpr long double kPiL = 3.14159265358979323846264338327950288L;

CLD hankel_ld(int n, long double w) {
  return {std::cyl_bessel_jl(n, w), std::cyl_neumannl(n, w)};
}

// H_n'(w) using the derivative recurrence.
CLD hankel_deriv_ld(int n, long double w) {
  if (n == 0) return -hankel_ld(1, w);
  return 0.5L * (hankel_ld(n - 1, w) - hankel_ld(n + 1, w));
}

long double jderiv_ld(int n, long double w) {
  if (n == 0) return -std::cyl_bessel_jl(1, w);
  return 0.5L * (std::cyl_bessel_jl(n - 1, w) - std::cyl_bessel_jl(n + 1, w));
}

constexpr int kMaxTerms = 260;

} // namespace

Complex MieDisk::value(const Point2& z, const Point2& x) const {
  const Point2 pz = z - center, px = x - center;
  const long double dz = pz.norm(), dx = px.norm();
  if (dz <= radius || dx <= radius) throw std::invalid_argument("MieDisk::value: point not outside");
  const long double tz = std::atan2(pz.y(), pz.x()), tx = std::atan2(px.y(), px.x());
  const long double w = k * (z - x).norm();
  const CLD gamma = CLD(0.0L, -0.25L) * hankel_ld(0, w);

  const long double wa = k * radius;
  CLD scat = 0.25L * CLD(0.0L, 1.0L) * (jderiv_ld(0, wa) / hankel_deriv_ld(0, wa)) *
             hankel_ld(0, k * dz) * hankel_ld(0, k * dx);
  for (int n = 1; n < kMaxTerms; ++n) {
    const CLD term = 0.5L * CLD(0.0L, 1.0L) * (jderiv_ld(n, wa) / hankel_deriv_ld(n, wa)) *
                     hankel_ld(n, k * dz) * hankel_ld(n, k * dx) *
                     std::cos(n * (tx - tz));
    scat += term;
    if (n > 8 && std::abs(term) < 1e-20L * (std::abs(scat) + 1e-30L)) break;
  }
  const CLD total = gamma + scat;
  return {static_cast<Real>(total.real()), static_cast<Real>(total.imag())};
}

Complex MieDisk::value_source_on(Real theta_z, const Point2& x) const {
  const Point2 px = x - center;
  const long double dx = px.norm();
  if (dx <= radius) throw std::invalid_argument("MieDisk::value_source_on: point not outside");
  const long double tx = std::atan2(px.y(), px.x());
  const long double wa = k * radius;
  const long double wd = k * dx;

  // Overflow-free evaluation of H_n(wd) / H_n'(wa) through ratio recurrences:
  // rho_n = H_n(w)/H_{n-1}(w) obeys rho_{n+1} = 2n/w - 1/rho_n.
  CLD rho_a = hankel_ld(1, wa) / hankel_ld(0, wa);
  CLD rho_d = hankel_ld(1, wd) / hankel_ld(0, wd);
  CLD tau = hankel_ld(0, wd) / hankel_ld(0, wa);  // H_n(wd)/H_n(wa)
  CLD acc = hankel_ld(0, wd) / hankel_deriv_ld(0, wa);
  for (int n = 1; n < 2000; ++n) {
    if (n > 1) {
      rho_a = 2.0L * (n - 1) / wa - 1.0L / rho_a;
      rho_d = 2.0L * (n - 1) / wd - 1.0L / rho_d;
      tau *= rho_d / rho_a;
    } else {
      tau *= rho_d / rho_a;
    }
    const CLD ratio_a = rho_a / (1.0L - (n / wa) * rho_a);  // H_n(wa)/H_n'(wa)
    const CLD term = 2.0L * tau * ratio_a *
                     std::cos(n * (tx - static_cast<long double>(theta_z)));
    acc += term;
    if (n > 12 && std::abs(term) < 1e-22L * (std::abs(acc) + 1e-30L)) break;
  }
  acc /= 2.0L * kPiL * wa;
  return {static_cast<Real>(acc.real()), static_cast<Real>(acc.imag())};
}

const std::vector<CLD>& MieDisk::beta_table() const {
  if (beta_.empty()) {
    const long double wa = k * radius;
    const int nmax = 6000;
    beta_.resize(nmax + 1);
    beta_[0] = hankel_ld(0, wa) / hankel_deriv_ld(0, wa) / (2.0L * kPiL * wa) +
               std::log(2.0L) / (2.0L * kPiL);
    CLD rho = hankel_ld(1, wa) / hankel_ld(0, wa);
    for (int n = 1; n <= nmax; ++n) {
      if (n > 1) rho = 2.0L * (n - 1) / wa - 1.0L / rho;
      const CLD ratio = rho / (1.0L - (n / wa) * rho);  // H_n/H_n'
      beta_[n] = ratio / (kPiL * wa) + 1.0L / (kPiL * n);
    }
  }
  return beta_;
}

Complex MieDisk::pair_smooth(Real theta_z, Real theta_x) const {
  const std::vector<CLD>& beta = beta_table();
  const long double dt = static_cast<long double>(theta_z) - theta_x;
  CLD acc = beta[0];
  for (size_t n = 1; n < beta.size(); ++n) {
    acc += beta[n] * std::cos(n * dt);
  }
  return {static_cast<Real>(acc.real()), static_cast<Real>(acc.imag())};
}

CVec2 fd_gradient(const std::function<Complex(const Point2&)>& f, const Point2& x, Real h) {
  CVec2 g;
  for (int i = 0; i < 2; ++i) {
    Point2 e = Point2::Zero();
    e[i] = h;
    g[i] = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return g;
}

Complex fd_laplacian(const std::function<Complex(const Point2&)>& f, const Point2& x, Real h) {
  const Complex c = f(x);
  Complex acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    Point2 e = Point2::Zero();
    e[i] = h;
    acc += f(x + e) - 2.0 * c + f(x - e);
  }
  return acc / (h * h);
}

} // namespace helmdisk::testing
