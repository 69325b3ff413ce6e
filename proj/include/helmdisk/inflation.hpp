#ifndef HELMDISK_INFLATION_HPP
#define HELMDISK_INFLATION_HPP

#include "bem.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "types.hpp"

#include <memory>
#include <vector>

namespace helmdisk {

/// Scattered (smooth) background data around the growing circle: the four
/// sample matrices one marching step consumes, all over the grid angles
/// t_i = -pi + 2 pi i / N_f relative to the growth center. The free-space
/// kernel parts are handled analytically inside the step; a background only
/// supplies the scattered remainder u = N - Gamma, which is smooth across
/// the shells. Empty matrices mean an empty background.
struct StepBackground {
  /// us_nn(i,j) = u(z_R(t_i), x_R(t_j)).
  CMatrix us_nn;
  /// us_dn_cross(i,j) = d/dnu_{y_r(t_j)} u(x_R(t_i), y_r(t_j)).
  CMatrix us_dn_cross;
  /// us_dn_same(i,j) = d/dnu_{y_R(t_j)} u(x_R(t_i), y_R(t_j)).
  CMatrix us_dn_same;
  /// us_dd_cross(i,j) = d/dnu_{y_R(t_i)} d/dnu_{w_r(t_j)} u(y_R(t_i), w_r(t_j)).
  CMatrix us_dd_cross;
};

class InflationBackground {
 public:
  virtual ~InflationBackground() = default;

  virtual Real wavenumber() const = 0;
  virtual const Point2& center() const = 0;
  virtual const BoundaryGrid& grid() const = 0;
  /// Domain of the background obstacles (for clearance checks).
  virtual const DiskDomain& domain() const = 0;

  /// R(zeta, zeta) of the background Neumann function.
  virtual Complex regular_at_center() const = 0;

  /// Data for one step from radius r to radius R > r.
  virtual StepBackground make(Real r, Real big_r) const = 0;
};

/// Empty background: N = Gamma, everything closed-form.
class FreeInflationBackground final : public InflationBackground {
 public:
  FreeInflationBackground(Real k, Point2 zeta, int nf);

  Real wavenumber() const override { return dom_.k; }
  const Point2& center() const override { return zeta_; }
  const BoundaryGrid& grid() const override { return grid_; }
  const DiskDomain& domain() const override { return dom_; }
  Complex regular_at_center() const override { return {0.0, 0.0}; }
  StepBackground make(Real r, Real big_r) const override;

 private:
  DiskDomain dom_;
  Point2 zeta_;
  BoundaryGrid grid_;
};

/// Background driven by an arbitrary NeumannEvaluator. Builds the matrices
/// entry by entry; fine for coarse grids and small backgrounds.
class EvaluatorInflationBackground final : public InflationBackground {
 public:
  EvaluatorInflationBackground(std::shared_ptr<const NeumannEvaluator> ev, Point2 zeta, int nf);

  Real wavenumber() const override { return ev_->domain().k; }
  const Point2& center() const override { return zeta_; }
  const BoundaryGrid& grid() const override { return grid_; }
  const DiskDomain& domain() const override { return ev_->domain(); }
  Complex regular_at_center() const override { return ev_->regular_value(zeta_, zeta_); }
  StepBackground make(Real r, Real big_r) const override;

 private:
  std::shared_ptr<const NeumannEvaluator> ev_;
  Point2 zeta_;
  BoundaryGrid grid_;
};

/// Background over a BEM system, vectorized: densities for all circle sources
/// are solved in one pass and the scattered parts assembled as matrix
/// products. Used for production-size grids.
class BemInflationBackground final : public InflationBackground {
 public:
  BemInflationBackground(std::shared_ptr<const BemSystem> sys, Point2 zeta, int nf);

  Real wavenumber() const override { return sys_->domain().k; }
  const Point2& center() const override { return zeta_; }
  const BoundaryGrid& grid() const override { return grid_; }
  const DiskDomain& domain() const override { return sys_->domain(); }
  Complex regular_at_center() const override;
  StepBackground make(Real r, Real big_r) const override;

 private:
  struct Shell;  // per-radius density and kernel blocks
  Shell build_shell(Real rho) const;

  std::shared_ptr<const BemSystem> sys_;
  Point2 zeta_;
  BoundaryGrid grid_;
};

/// Marching state: Fourier data of the smooth part of N on the growing
/// circle, stored as the sample matrix smooth(i, j) = Ntilde(z_r(t_i), x_r(t_j)).
struct InflationState {
  Point2 zeta;
  Real k = 1.0;
  Real radius = 0.0;
  int nf = 0;
  CMatrix smooth;
  /// Antisymmetric defect of the last update before its symmetric projection.
  Real asymmetry = 0.0;

  /// Smooth-part Fourier series of row i (source angle t_i).
  FourierSeries row_series(int i) const;

  /// Full value N(z_r(t_a), x_r(t_b)) reconstructed from the state.
  Complex value(Real t_a, Real t_b) const;

  /// max_{a,b} |N(a,b) - N(b,a)| over the grid, from the smooth part.
  Real symmetry_residual() const;
};

/// Update form: the pre-simplification (numerically stable) recursion solves
/// the new modes semi-implicitly; the simplified variant substitutes the
/// current state explicitly.
enum class StepForm { stable, simplified };

struct StepOptions {
  StepForm form = StepForm::stable;
  /// Refuse the step when the top-quartile modes carry more than this
  /// fraction of the total mode energy.
  Real mode_energy_cap = 0.01;
};

/// Seed state at radius r0 from the small-disk expansion: constant smooth
/// part (2 log(k r0) + 2 gamma - i pi)/(4 pi) + R(zeta, zeta).
InflationState init_state(const InflationBackground& bg, Real r0);

/// One marching step from state.radius to state.radius + dr.
InflationState step(const InflationState& st, const InflationBackground& bg, Real dr,
                    const StepOptions& opt = {});

struct MarchRecord {
  int index = 0;
  Real r = 0.0;
  Real dr = 0.0;
  Real symmetry = 0.0;
};

struct MarchOptions {
  Real dr_max = 0.01;
  /// Per-step cap dr <= growth_cap * r (the local error scales with dr^2/r).
  Real growth_cap = 0.1;
  StepOptions step;
};

/// Repeated stepping until the radius reaches r_target.
InflationState march(InflationState st, const InflationBackground& bg, Real r_target,
                     const MarchOptions& opt, std::vector<MarchRecord>* log = nullptr);

} // namespace helmdisk

#endif
