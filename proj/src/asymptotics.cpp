#include "helmdisk/asymptotics.hpp"

#include "helmdisk/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace helmdisk {

std::pair<Complex, CVec2> regular_part_at_center(const NeumannEvaluator& ev, const Point2& zeta,
                                                 Real intended_radius) {
  for (const Disk& d : ev.domain().disks) {
    const Real gap = (zeta - d.center).norm() - d.radius;
    if (gap < 2.0 * intended_radius) {
      throw std::invalid_argument("helmdisk: insertion center too close to an existing boundary");
    }
  }
  return {ev.regular_value(zeta, zeta), ev.regular_grad(zeta, zeta)};
}

LocalData make_local_data(const NeumannEvaluator& ev, const Point2& z, const Point2& x,
                          const Point2& zeta, Real intended_radius) {
  LocalData ld = make_local_data(ev, z, zeta, intended_radius);
  ld.val_x = ev.value(x, zeta);
  ld.grad_x = ev.grad(x, zeta);
  return ld;
}

LocalData make_local_data(const NeumannEvaluator& ev, const Point2& z, const Point2& zeta,
                          Real intended_radius) {
  LocalData ld;
  ld.zeta = zeta;
  ld.k = ev.wavenumber();
  ld.val_z = ev.value(z, zeta);
  ld.grad_z = ev.grad(z, zeta);
  ld.hess_z = ev.hessian(z, zeta);
  auto [reg, reg_grad] = regular_part_at_center(ev, zeta, intended_radius);
  ld.reg = reg;
  ld.reg_grad = reg_grad;
  ld.val_x = ld.val_z;
  ld.grad_x = ld.grad_z;
  return ld;
}

namespace {

void require_small_kr(Real k, Real r) {
  if (!(r >= 0.0)) throw std::invalid_argument("helmdisk: negative insertion radius");
  if (k * r > kMaxKr) {
    throw std::invalid_argument("helmdisk: k*r exceeds the small-radius regime (k r <= 0.3)");
  }
}

} // namespace

Complex perturb_far(const LocalData& ld, Real r) {
  require_small_kr(ld.k, r);
  const Complex dots = ld.grad_z[0] * ld.grad_x[0] + ld.grad_z[1] * ld.grad_x[1];
  return kPi * r * r * (ld.k * ld.k * ld.val_z * ld.val_x - 2.0 * dots);
}

Complex perturb_on_boundary(const LocalData& ld, Real r, const Point2& y) {
  require_small_kr(ld.k, r);
  const Point2 d = y - ld.zeta;
  if (std::abs(d.norm() - r) > 1e-12 * std::max(r, 1.0)) {
    throw std::invalid_argument("helmdisk: evaluation point not on the inserted circle");
  }
  const CVec2 dc = d.cast<Complex>();
  const Complex lin = 2.0 * (dc[0] * ld.grad_z[0] + dc[1] * ld.grad_z[1]);
  const Complex quad = (dc.transpose() * ld.hess_z * dc)(0);
  // The -1/2 in the bracket is pinned numerically: fitting the residual
  // constant against the exact single-disk series over shrinking r converges
  // to -0.5 once the quadratic term's angular mean is accounted for.
  const Complex bracket = Complex(0.0, 0.5 * kPi) - kEulerGamma - 0.5 -
                          std::log(ld.k * r / 2.0) - kTwoPi * ld.reg;
  const Complex reg_dot = ld.reg_grad[0] * ld.grad_z[0] + ld.reg_grad[1] * ld.grad_z[1];
  return ld.val_z + lin + quad - r * r * ld.k * ld.k * 0.5 * ld.val_z * bracket -
         r * r * kTwoPi * reg_dot;
}

Complex seed_on_boundary_pair(Complex regular_at_center, Real r, Real k, Real theta_y,
                              Real theta_w) {
  require_small_kr(k, r);
  const Real one_minus_cos = 1.0 - std::cos(theta_y - theta_w);
  if (!(one_minus_cos > 0.0)) {
    throw std::invalid_argument("helmdisk: coincident angles in on-boundary pair");
  }
  return std::log(one_minus_cos) / kTwoPi +
         (2.0 * std::log(k * r) + 2.0 * kEulerGamma - kImag * kPi) / (4.0 * kPi) +
         regular_at_center;
}

Real lemma_singular_rr(Real dt) { return std::log1p(-std::cos(dt)) / kTwoPi; }

Real lemma_singular_RR(Real big_r, Real small_r, Real dt) {
  const Real r2 = small_r * small_r, R2 = big_r * big_r;
  return std::log1p(-std::cos(dt)) / (4.0 * kPi) +
         std::log(R2 * R2 + r2 * r2 - 2.0 * R2 * r2 * std::cos(dt)) / (4.0 * kPi);
}

Real lemma_singular_dnu(Real big_r, Real small_r, Real dt) {
  const Real r2 = small_r * small_r, R2 = big_r * big_r;
  const Real den = R2 * R2 + r2 * r2 - 2.0 * R2 * r2 * std::cos(dt);
  return -1.0 / (4.0 * kPi * big_r) +
         r2 * (R2 * std::cos(dt) - r2) / (kTwoPi * big_r * den);
}

} // namespace helmdisk
