#ifndef HELMDISK_DESIGN_HPP
#define HELMDISK_DESIGN_HPP

#include "bem.hpp"
#include "geometry.hpp"
#include "inflation.hpp"
#include "types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace helmdisk {

/// Scattering data over the source line: S_ij = d/dx2 N(z_i, z_j) and the
/// companion vectors N_j = (N(z_j, z_i))_i. The diagonal of the companion
/// carries the regular part (the log singularity is the quadrature's job).
struct ScatteringMatrix {
  CMatrix s;
  CMatrix companion;  // companion(i, j) = N(z_j, z_i)
};

/// S and N_j through a full evaluator (validation path).
ScatteringMatrix scattering_matrix(const NeumannEvaluator& ev, const SourceLine& sources);

/// e(S) = (1/N^2) sum_ij |A_ij - S_ij|.
Real error_e(const CMatrix& s, const CMatrix& a);

/// S = (N+1)/2 (A - I/2) and its inverse.
CMatrix target_transform(const CMatrix& a);
CMatrix target_transform_inverse(const CMatrix& s);

/// Solve sum_j I_j N_j = b for the intensities (dense, validation side).
struct IntensitySolution {
  CVector intensities;
  Real residual = 0.0;
  Real min_singular_value = 0.0;
  bool rank_deficient = false;
};
IntensitySolution solve_intensities(const CMatrix& companion, const CVector& b);

/// Residual diagnostics of the discretized source system
/// (I/2 + 2/(N+1) S) u_j = I_j N_j for every j.
RVector discretized_system_residuals(const ScatteringMatrix& sm, const CVector& intensities);

/// Maintains the Neumann function of the growing design domain without dense
/// solves: per-source boundary traces on every disk, updated by Green-identity
/// peeling, with a Fourier-preconditioned fixed point for new traces.
class DomainField final : public NeumannEvaluator {
 public:
  DomainField(Real k, const SourceLine& sources, int nf);
  DomainField(const DomainField& other);
  DomainField& operator=(const DomainField& other);

  const DiskDomain& domain() const override { return dom_; }
  const SourceLine& sources() const { return sources_; }
  int nf() const { return grid_.nf; }

  Complex value(const Point2& z, const Point2& x) const override;
  CVec2 grad(const Point2& z, const Point2& x) const override;
  CMat2 hessian(const Point2& z, const Point2& x) const override;
  CMat2 mixed(const Point2& z, const Point2& x) const override;
  Complex regular_value(const Point2& z, const Point2& x) const override;
  CVec2 regular_grad(const Point2& z, const Point2& x) const override;

  /// Adds a disk and solves the new traces. Throws on geometry violations.
  void add_disk(const Disk& d);

  /// Replaces disk `index` radius (grow) and refreshes all traces.
  void set_radius(int index, Real radius);

  /// Scattering data of the current domain (no dense solves).
  ScatteringMatrix scattering() const;

  /// Gradient of N(z, x) in the tracked source coordinate z = z_s.
  CVec2 source_grad(int source, const Point2& x) const;

  /// Trace of N for tracked source s on disk d (used by tests).
  const CVector& trace(int source, int disk) const;

 private:
  struct TraceSet {
    std::vector<CVector> val;              // per disk: N(z, y_d(t_j))
    std::array<std::vector<CVector>, 2> grad;  // per component: d/dz_l traces
  };

  void refresh_tracked();
  TraceSet solve_traces(const Point2& z) const;
  const TraceSet& traces_for(const Point2& z) const;  // tracked or cached
  Complex eval_traces(const TraceSet& ts, const Point2& x, int skip_val = -1) const;

  DiskDomain dom_;
  SourceLine sources_;
  BoundaryGrid grid_;
  std::vector<TraceSet> tracked_;
  mutable std::map<std::array<Real, 2>, TraceSet> cache_;
  mutable std::mutex mutex_;

  // Fixed-point machinery: per-disk Fourier multipliers of the same-circle
  // double layer and dense cross-disk blocks.
  void rebuild_operator();
  std::vector<RVector> self_multipliers_;
  std::vector<std::vector<CMatrix>> cross_;  // [target disk][source disk]
};

struct DesignParams {
  Real probe_radius = 0.01;
  Real dr = 0.005;
  int grid_nx = 40;
  int grid_ny = 40;
  Real box_x0 = 0.0, box_x1 = 1.0;
  Real box_y0 = 0.05, box_y1 = 1.0;
  int refine_factor = 4;
  int max_disks = 10;
  int max_grow_steps = 200;
  int nf = 32;
  /// Clearance factor: gaps to other disks and to the source line must stay
  /// above this multiple of the current radius.
  Real separation_factor = 3.0;
};

struct DesignAction {
  std::string kind;  // "place" or "grow"
  int disk = -1;
  Point2 center{0.0, 0.0};
  Real radius = 0.0;
  Real e_before = 0.0;
  Real e_after = 0.0;
};

struct DesignRun {
  CMatrix target;
  DesignParams params;
  std::vector<DesignAction> history;
  Real e_initial = 0.0;
  Real e_final = 0.0;
  DiskDomain domain;
};

struct CenterProposal {
  Point2 center{0.0, 0.0};
  Real predicted_e = 0.0;
  bool feasible = false;
};

/// Grid search (with one refinement pass) for the next insertion center,
/// scoring each candidate by the far-field perturbation of every S_ij.
CenterProposal propose_center(const DomainField& field, const CMatrix& target,
                              const DesignParams& params);

/// Grows disk `index` by params.dr while e(S) strictly decreases; rolls the
/// last step back on stall. Returns the accepted actions.
std::vector<DesignAction> grow_until_stall(DomainField& field, int index, const CMatrix& target,
                                           const DesignParams& params);

/// Full greedy loop: place, grow, repeat until no center reduces e.
DesignRun design_loop(const CMatrix& target, Real k, int n_sources, const DesignParams& params);

} // namespace helmdisk

#endif
