#ifndef HELMDISK_ASYMPTOTICS_HPP
#define HELMDISK_ASYMPTOTICS_HPP

#include "bem.hpp"
#include "types.hpp"

namespace helmdisk {

/// Background data entering the small-disk perturbation formulas, all taken
/// from a NeumannEvaluator at the insertion center zeta.
struct LocalData {
  Complex val_z;      // N(z, zeta)
  Complex val_x;      // N(x, zeta)
  CVec2 grad_z;       // gradient in the second argument of N(z, zeta)
  CVec2 grad_x;
  CMat2 hess_z;       // Hessian in the second argument of N(z, zeta)
  Complex reg;        // R(zeta, zeta) = (N - Gamma)(zeta, zeta)
  CVec2 reg_grad;     // grad_w R(zeta, w) at w = zeta
  Point2 zeta;
  Real k = 1.0;
};

/// Regular part of the Neumann function at the coincidence point:
/// (R(zeta,zeta), grad_w R(zeta,w)|_{w=zeta}). Throws when zeta is closer
/// than 2 * intended_radius to an existing boundary.
std::pair<Complex, CVec2> regular_part_at_center(const NeumannEvaluator& ev, const Point2& zeta,
                                                 Real intended_radius);

LocalData make_local_data(const NeumannEvaluator& ev, const Point2& z, const Point2& x,
                          const Point2& zeta, Real intended_radius);
LocalData make_local_data(const NeumannEvaluator& ev, const Point2& z, const Point2& zeta,
                          Real intended_radius);

/// Hard smallness bound on k*r for the first-theorem formulas.
inline constexpr Real kMaxKr = 0.3;

/// Far-field correction of inserting B_r(zeta):
///   N_new(z,x) - N(z,x) = pi r^2 (k^2 N(z,zeta) N(x,zeta)
///                                  - 2 grad N(z,zeta) . grad N(x,zeta))
/// up to O(r^3 log r). Throws if k r > 0.3.
Complex perturb_far(const LocalData& ld, Real r);

/// Value of the perturbed Neumann function at a point y on the inserted
/// circle (second expansion of the small-disk theorem), up to O(r^3 log r).
Complex perturb_on_boundary(const LocalData& ld, Real r, const Point2& y);

/// Both points on the inserted circle (third expansion):
/// log(1-cos(ty-tw))/(2pi) + (2 log(kr) + 2 gamma - i pi)/(4 pi) + R(zeta,zeta),
/// up to O(r log r).
Complex seed_on_boundary_pair(Complex regular_at_center, Real r, Real k, Real theta_y,
                              Real theta_w);

// Explicit singular parts of the boundary-kernel splits; the smooth remainders
// Q1, Q2, Q3 are defined by subtracting these from the corresponding trace.

/// Both points on the r-circle (also the mixed-radius pair): (1/2pi) log(1-cos dt).
Real lemma_singular_rr(Real dt);

/// Both points on the R-circle over the r-history:
/// (1/4pi) log(1-cos dt) + (1/4pi) log(R^4 + r^4 - 2 R^2 r^2 cos dt).
Real lemma_singular_RR(Real big_r, Real small_r, Real dt);

/// Normal-derivative trace on the R-circle:
/// -1/(4 pi R) + (1/(2 pi R)) r^2 (R^2 cos dt - r^2)/(R^4 + r^4 - 2 R^2 r^2 cos dt).
Real lemma_singular_dnu(Real big_r, Real small_r, Real dt);

} // namespace helmdisk

#endif
