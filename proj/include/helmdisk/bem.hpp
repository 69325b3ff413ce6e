#ifndef HELMDISK_BEM_HPP
#define HELMDISK_BEM_HPP

#include "geometry.hpp"
#include "quadrature.hpp"
#include "types.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace helmdisk {

/// Interface answering exterior Neumann-function queries for a fixed domain.
/// All derivative queries act on the second argument unless stated otherwise.
class NeumannEvaluator {
 public:
  virtual ~NeumannEvaluator() = default;

  virtual const DiskDomain& domain() const = 0;
  Real wavenumber() const { return domain().k; }

  /// N(z, x); z, x outside all disks, z != x.
  virtual Complex value(const Point2& z, const Point2& x) const = 0;
  /// Gradient in x of N(z, x).
  virtual CVec2 grad(const Point2& z, const Point2& x) const = 0;
  /// Hessian in x of N(z, x).
  virtual CMat2 hessian(const Point2& z, const Point2& x) const = 0;
  /// Mixed derivative matrix M_ij = d/dz_i d/dx_j N(z, x).
  virtual CMat2 mixed(const Point2& z, const Point2& x) const = 0;

  /// Regular part R(z, x) = N(z, x) - Gamma^k(z, x); smooth, finite at x == z.
  virtual Complex regular_value(const Point2& z, const Point2& x) const = 0;
  /// Gradient in x of the regular part (finite at x == z).
  virtual CVec2 regular_grad(const Point2& z, const Point2& x) const = 0;
};

/// Empty domain: N is exactly the fundamental solution.
class FreeSpaceEvaluator final : public NeumannEvaluator {
 public:
  explicit FreeSpaceEvaluator(Real k) { dom_.k = k; }

  const DiskDomain& domain() const override { return dom_; }
  Complex value(const Point2& z, const Point2& x) const override;
  CVec2 grad(const Point2& z, const Point2& x) const override;
  CMat2 hessian(const Point2& z, const Point2& x) const override;
  CMat2 mixed(const Point2& z, const Point2& x) const override;
  Complex regular_value(const Point2&, const Point2&) const override { return {0.0, 0.0}; }
  CVec2 regular_grad(const Point2&, const Point2&) const override { return CVec2::Zero(); }

 private:
  DiskDomain dom_;
};

/// Values of N(z, .) on one disk boundary grid. When the source sits on the
/// traced circle the log(1 - cos) singular part is split off and `values`
/// carries NaN at the coincident node.
struct BoundaryTrace {
  int disk = 0;
  std::vector<Real> angles;
  CVector values;
  CVector smooth;
  bool split_active = false;
  Real source_angle = 0.0;
};

/// Dense Nystrom discretization of the exterior Neumann problem: the total
/// field N(z,.) = Gamma(z,.) + S phi with the single-layer density phi solving
/// the second-kind system (I/2 + K') phi = -dGamma/dnu. Logarithmic kernel
/// parts on each circle are integrated with spectral log-sin weights.
class BemSystem {
 public:
  BemSystem(DiskDomain dom, int nc_per_disk);

  const DiskDomain& domain() const { return dom_; }
  int nc() const { return nc_; }
  int unknowns() const { return total_; }
  Real rcond() const { return rcond_; }

  /// Density for an off-boundary source point.
  CVector solve(const Point2& z) const;
  /// Densities for the two source-coordinate derivatives of the right side.
  std::array<CVector, 2> solve_source_grad(const Point2& z) const;
  /// Densities for many sources in one factorized solve (one column each).
  CMatrix solve_many(const std::vector<Point2>& zs) const;
  /// Densities of the directional source derivative along dirs[i] per source.
  CMatrix solve_many_dir(const std::vector<Point2>& zs, const std::vector<Point2>& dirs) const;
  /// Density for a source on a boundary circle, for the splitting
  /// N(z0,.) = 2 Gamma(z0,.) + S phi.
  CVector solve_on_boundary(int disk, Real angle) const;

  /// Single-layer potential and derivatives at an exterior point.
  Complex layer_value(const CVector& phi, const Point2& x) const;
  CVec2 layer_grad(const CVector& phi, const Point2& x) const;
  CMat2 layer_hessian(const CVector& phi, const Point2& x) const;

  /// Single-layer potential evaluated on a boundary circle (log-split rule).
  Complex layer_value_on_boundary(const CVector& phi, int disk, Real angle) const;

  /// K' phi at an arbitrary boundary angle (exterior limit without the jump).
  Complex adjoint_layer_on_boundary(const CVector& phi, int disk, Real angle) const;

  /// Trigonometric interpolation of a density at an arbitrary angle.
  Complex density_at(const CVector& phi, int disk, Real angle) const;

  Point2 node(int disk, int j) const;
  Real node_angle(int j) const { return -kPi + kTwoPi * j / nc_; }

 private:
  friend class BemEvaluator;

  DiskDomain dom_;
  int nc_ = 0;
  int total_ = 0;
  Real rcond_ = 0.0;
  Eigen::PartialPivLU<CMatrix> lu_;

  Complex same_disk_gamma(int disk, Real dt) const;      // Gamma * a with log split folded in
  Complex kprime_kernel(const Point2& x, const Point2& nu, const Point2& y) const;
};

/// BEM-backed NeumannEvaluator with per-source density caching. Symmetric
/// within discretization error: N(z,x) = N(x,z).
class BemEvaluator final : public NeumannEvaluator {
 public:
  BemEvaluator(DiskDomain dom, int nc_per_disk);

  const DiskDomain& domain() const override { return sys_ ? sys_->domain() : free_.domain(); }
  const BemSystem& system() const { return *sys_; }

  Complex value(const Point2& z, const Point2& x) const override;
  CVec2 grad(const Point2& z, const Point2& x) const override;
  CMat2 hessian(const Point2& z, const Point2& x) const override;
  CMat2 mixed(const Point2& z, const Point2& x) const override;
  Complex regular_value(const Point2& z, const Point2& x) const override;
  CVec2 regular_grad(const Point2& z, const Point2& x) const override;

  /// N(z, y(t)) sampled on the grid angles of one disk boundary; see
  /// BoundaryTrace. z must lie strictly outside the traced circle.
  BoundaryTrace boundary_trace(const Point2& z, int disk, const BoundaryGrid& grid) const;

  /// Trace with the source on the traced circle at a grid angle: returns the
  /// smooth part (log(1-cos) split off) plus the diverging raw values.
  BoundaryTrace boundary_trace_on(int disk, Real source_angle, const BoundaryGrid& grid) const;

  /// Smooth-part matrix S_ij = Ntilde(y(t_i), y(t_j)) for all grid pairs on
  /// one circle (the quantity the radius-inflation scheme marches).
  CMatrix boundary_pair_smooth(int disk, const BoundaryGrid& grid) const;

 private:
  struct CacheEntry {
    CVector phi;
    bool has_grad = false;
    std::array<CVector, 2> dphi;
  };

  const CacheEntry& density(const Point2& z, bool need_grad) const;
  void check_exterior(const Point2& p, const char* who) const;

  FreeSpaceEvaluator free_;
  std::shared_ptr<BemSystem> sys_;  // null for the empty domain
  mutable std::mutex mutex_;
  mutable std::map<std::array<Real, 2>, CacheEntry> cache_;
};

/// Max boundary-condition residual |d/dnu N(z, y)| sampled at the midpoints
/// between collocation nodes (trigonometric density interpolation).
Real boundary_residual(const BemSystem& sys, const CVector& phi, const Point2& z);

/// Gamma(y(s), y(t)) on one circle minus (1/4pi) log(4 sin^2((s-t)/2));
/// continuous, with the exact coincidence limit at dt = 0.
Complex circle_gamma_regular(Real radius, Real k, Real dt);

/// dGamma/dnu_y(t) for both points on one circle; continuous with the limit
/// 1/(4 pi radius) at dt = 0.
Complex circle_gamma_dnu(Real radius, Real k, Real dt);

} // namespace helmdisk

#endif
