#include "helmdisk/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace helmdisk {

namespace {

using LD  = long double;
using CLD = std::complex<LD>;

constexpr LD kPiL    = 3.14159265358979323846264338327950288L;
constexpr LD kGammaL = 0.57721566490153286060651209008240243L;

// Crossover between the ascending series and the asymptotic expansion.
// At z = 16 the series' largest term is ~e^z/(pi z) ~ 1.8e5, which costs
// ~9e-15 absolute in 80-bit accumulation, while the optimally truncated
// asymptotic tail is ~e^{-2z} ~ 1.3e-14. Both sides meet the 1e-12 contract.
constexpr LD kSeriesCut = 16.0L;

struct Quad {
  LD j0, y0, j1, y1;
};

// Ascending power series for J0, Y0, J1, Y1 (Abramowitz & Stegun 9.1.10-13).
Quad bessel_series(LD z) {
  const LD q = z * z / 4.0L;
  const LD lg = std::log(z / 2.0L) + kGammaL;

  LD j0 = 1.0L, t0 = 1.0L;        // term of J0 series
  LD s0 = 0.0L;                   // sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2
  LD j1s = 1.0L, t1 = 1.0L;       // J1 = (z/2) * j1s
  LD s1 = 1.0L, u1 = 1.0L;        // sum_m (H_m + H_{m+1}) (-q)^m / (m!(m+1)!), H_0+H_1 = 1
  LD harm = 0.0L;
  for (int m = 1; m <= 200; ++m) {
    const LD md = static_cast<LD>(m);
    harm += 1.0L / md;
    t0 *= -q / (md * md);
    j0 += t0;
    s0 += -t0 * harm;             // (-1)^{m+1} H_m q^m/(m!)^2
    t1 *= -q / (md * (md + 1.0L));
    j1s += t1;
    u1 *= -q / (md * (md + 1.0L));
    s1 += u1 * (2.0L * harm + 1.0L / (md + 1.0L));  // H_m + H_{m+1}
    if (std::fabs(t0) < 1e-25L * std::fabs(j0) && std::fabs(t1) < 1e-25L) break;
  }
  const LD j1 = (z / 2.0L) * j1s;

  Quad out;
  out.j0 = j0;
  out.j1 = j1;
  out.y0 = (2.0L / kPiL) * (lg * j0 + s0);
  out.y1 = (2.0L / kPiL) * lg * j1 - 2.0L / (kPiL * z) - (z / (2.0L * kPiL)) * s1;
  return out;
}

// Hankel asymptotic expansion, adaptively truncated at the smallest term:
// H_nu^(1)(z) ~ sqrt(2/(pi z)) e^{i(z - (2nu+1)pi/4)} sum_k a_k(nu) (i/z)^k.
CLD hankel_asymptotic(int nu, LD z) {
  const CLD iz(0.0L, 1.0L / z);
  const LD fournu2 = 4.0L * nu * nu;
  CLD sum(0.0L, 0.0L);
  CLD term(1.0L, 0.0L);
  LD prev = 1e30L;
  for (int k = 0; k < 40; ++k) {
    const LD mag = std::abs(term);
    if (mag > prev) break;        // past the smallest term
    sum += term;
    if (mag < 1e-22L) break;
    prev = mag;
    const LD tk = 2.0L * k + 1.0L;
    term *= (fournu2 - tk * tk) / (8.0L * (k + 1.0L)) * iz;
  }
  const LD phase = z - (2.0L * nu + 1.0L) * kPiL / 4.0L;
  const CLD e(std::cos(phase), std::sin(phase));
  return std::sqrt(2.0L / (kPiL * z)) * e * sum;
}

Quad bessel_all(LD z) {
  if (z <= kSeriesCut) return bessel_series(z);
  const CLD h0 = hankel_asymptotic(0, z);
  const CLD h1 = hankel_asymptotic(1, z);
  return {h0.real(), h0.imag(), h1.real(), h1.imag()};
}

void require_positive(Real z) {
  if (!(z > 0.0)) throw std::domain_error("helmdisk: Bessel/Hankel argument must be positive");
}

} // namespace

Real bessel_j0(Real z) {
  require_positive(z);
  return static_cast<Real>(bessel_all(z).j0);
}

Real bessel_y0(Real z) {
  require_positive(z);
  return static_cast<Real>(bessel_all(z).y0);
}

Real bessel_j1(Real z) {
  require_positive(z);
  return static_cast<Real>(bessel_all(z).j1);
}

Real bessel_y1(Real z) {
  require_positive(z);
  return static_cast<Real>(bessel_all(z).y1);
}

Complex hankel1_0(Real z) {
  require_positive(z);
  const Quad q = bessel_all(z);
  return {static_cast<Real>(q.j0), static_cast<Real>(q.y0)};
}

Complex hankel1_1(Real z) {
  require_positive(z);
  const Quad q = bessel_all(z);
  return {static_cast<Real>(q.j1), static_cast<Real>(q.y1)};
}

HankelPair hankel1_01(Real z) {
  require_positive(z);
  const Quad q = bessel_all(z);
  return {{static_cast<Real>(q.j0), static_cast<Real>(q.y0)},
          {static_cast<Real>(q.j1), static_cast<Real>(q.y1)}};
}

Complex gamma_k(Real k, const Point2& z, const Point2& x) {
  const Real d = (z - x).norm();
  if (d == 0.0) throw std::domain_error("helmdisk: gamma_k at coincident points");
  return Complex(0.0, -0.25) * hankel1_0(k * d);
}

CVec2 gamma_k_grad(Real k, const Point2& z, const Point2& x) {
  const Point2 diff = x - z;
  const Real d = diff.norm();
  if (d == 0.0) throw std::domain_error("helmdisk: gamma_k_grad at coincident points");
  const Complex fp = Complex(0.0, 0.25) * k * hankel1_1(k * d);  // f'(d)
  return (fp / d) * diff.cast<Complex>();
}

CMat2 gamma_k_hessian(Real k, const Point2& z, const Point2& x) {
  const Point2 diff = x - z;
  const Real d = diff.norm();
  if (d == 0.0) throw std::domain_error("helmdisk: gamma_k_hessian at coincident points");
  const HankelPair h = hankel1_01(k * d);
  const Complex fp  = Complex(0.0, 0.25) * k * h.h1;
  const Complex fpp = Complex(0.0, 0.25) * k * k * (h.h0 - h.h1 / (k * d));
  const Eigen::Matrix2d uu = (diff / d) * (diff / d).transpose();
  CMat2 out = fpp * uu.cast<Complex>();
  out += (fp / d) * (Eigen::Matrix2d::Identity() - uu).cast<Complex>();
  return out;
}

} // namespace helmdisk
