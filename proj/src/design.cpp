#include "helmdisk/design.hpp"

#include "helmdisk/asymptotics.hpp"
#include "helmdisk/special_functions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace helmdisk {

namespace {

// Regular part of Gamma at coincidence: lim (Gamma - log|d|/2pi).
Complex gamma_coincidence_regular(Real k) {
  return Complex((std::log(k / 2.0) + kEulerGamma) / kTwoPi, -0.25);
}

Complex dnu_gamma(Real k, const Point2& x, const Point2& y, const Point2& nu_y) {
  const Point2 diff = y - x;
  const Real d = diff.norm();
  return Complex(0.0, 0.25) * k * hankel1_1(k * d) * (nu_y.dot(diff) / d);
}

} // namespace

// ---------------------------------------------------------------------------
// Scattering data through a full evaluator.

ScatteringMatrix scattering_matrix(const NeumannEvaluator& ev, const SourceLine& sources) {
  const int n = sources.count;
  const Real k = ev.wavenumber();
  ScatteringMatrix out;
  out.s.resize(n, n);
  out.companion.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out.s(i, i) = ev.regular_grad(sources.points[i], sources.points[i])[1];
        out.companion(i, i) = gamma_coincidence_regular(k) +
                              ev.regular_value(sources.points[i], sources.points[i]);
      } else {
        out.s(i, j) = ev.grad(sources.points[i], sources.points[j])[1];
        out.companion(i, j) = ev.value(sources.points[j], sources.points[i]);
      }
    }
  }
  return out;
}

Real error_e(const CMatrix& s, const CMatrix& a) {
  if (s.rows() != a.rows() || s.cols() != a.cols()) {
    throw std::invalid_argument("helmdisk: error_e shape mismatch");
  }
  return (a - s).cwiseAbs().sum() / static_cast<Real>(s.rows() * s.cols());
}

CMatrix target_transform(const CMatrix& a) {
  const Real n = static_cast<Real>(a.rows());
  CMatrix out = a;
  out.diagonal().array() -= Complex(0.5, 0.0);
  return (n + 1.0) / 2.0 * out;
}

CMatrix target_transform_inverse(const CMatrix& s) {
  const Real n = static_cast<Real>(s.rows());
  CMatrix out = 2.0 / (n + 1.0) * s;
  out.diagonal().array() += Complex(0.5, 0.0);
  return out;
}

IntensitySolution solve_intensities(const CMatrix& companion, const CVector& b) {
  if (companion.rows() != b.size()) {
    throw std::invalid_argument("helmdisk: intensity system shape mismatch");
  }
  // Columns of the system matrix are the N_j vectors.
  IntensitySolution out;
  const Eigen::JacobiSVD<CMatrix> svd(companion, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.min_singular_value = svd.singularValues().minCoeff();
  out.rank_deficient =
      out.min_singular_value < 1e-12 * svd.singularValues().maxCoeff();
  out.intensities = companion.colPivHouseholderQr().solve(b);
  out.residual = (companion * out.intensities - b).norm();
  return out;
}

RVector discretized_system_residuals(const ScatteringMatrix& sm, const CVector& intensities) {
  const int n = static_cast<int>(sm.s.rows());
  CMatrix sys = 2.0 / (n + 1.0) * sm.s;
  sys.diagonal().array() += Complex(0.5, 0.0);
  RVector out(n);
  const Eigen::PartialPivLU<CMatrix> lu(sys);
  for (int j = 0; j < n; ++j) {
    const CVector rhs = intensities[j] * sm.companion.col(j);
    const CVector u = lu.solve(rhs);
    out[j] = (sys * u - rhs).norm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// DomainField

DomainField::DomainField(Real k, const SourceLine& sources, int nf)
    : sources_(sources), grid_(nf) {
  dom_.k = k;
  tracked_.resize(sources_.count);
  refresh_tracked();
}

DomainField::DomainField(const DomainField& other)
    : dom_(other.dom_),
      sources_(other.sources_),
      grid_(other.grid_),
      tracked_(other.tracked_),
      self_multipliers_(other.self_multipliers_),
      cross_(other.cross_) {}

DomainField& DomainField::operator=(const DomainField& other) {
  if (this != &other) {
    dom_ = other.dom_;
    sources_ = other.sources_;
    grid_ = other.grid_;
    tracked_ = other.tracked_;
    self_multipliers_ = other.self_multipliers_;
    cross_ = other.cross_;
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.clear();
  }
  return *this;
}

const CVector& DomainField::trace(int source, int disk) const {
  return tracked_[source].val[disk];
}

void DomainField::rebuild_operator() {
  const int nd = static_cast<int>(dom_.disks.size());
  const int nf = grid_.nf;
  const int modes = nf / 2 - 1;
  self_multipliers_.assign(nd, RVector());
  cross_.assign(nd, std::vector<CMatrix>(nd));

  // Same-circle double-layer multipliers from a de-aliased fine projection.
  const int fine = 8 * nf;
  for (int d = 0; d < nd; ++d) {
    const Real rad = dom_.disks[d].radius;
    CVector samp(fine);
    for (int j = 0; j < fine; ++j) {
      samp[j] = circle_gamma_dnu(rad, dom_.k, -kPi + kTwoPi * j / fine);
    }
    const FourierSeries f = fourier_project(samp, modes);
    RVector mult(modes + 1);
    mult[0] = rad * kTwoPi * f.cos_coeff[0].real();
    for (int m = 1; m <= modes; ++m) mult[m] = rad * kPi * f.cos_coeff[m].real();
    self_multipliers_[d] = mult;
  }

  for (int d = 0; d < nd; ++d) {
    for (int e = 0; e < nd; ++e) {
      if (d == e) continue;
      CMatrix blk(nf, nf);
      const Real w = kTwoPi / nf * dom_.disks[e].radius;
      for (int i = 0; i < nf; ++i) {
        const Point2 x = boundary_point(dom_.disks[d], grid_.angles[i]);
        for (int j = 0; j < nf; ++j) {
          const Point2 y = boundary_point(dom_.disks[e], grid_.angles[j]);
          const Point2 nu = boundary_normal(dom_.disks[e], grid_.angles[j]);
          blk(i, j) = w * dnu_gamma(dom_.k, x, y, nu);
        }
      }
      cross_[d][e] = std::move(blk);
    }
  }
}

DomainField::TraceSet DomainField::solve_traces(const Point2& z) const {
  const int nd = static_cast<int>(dom_.disks.size());
  const int nf = grid_.nf;
  const int modes = nf / 2 - 1;
  TraceSet ts;
  ts.val.assign(nd, CVector::Zero(nf));
  ts.grad[0].assign(nd, CVector::Zero(nf));
  ts.grad[1].assign(nd, CVector::Zero(nf));
  if (nd == 0) return ts;

  // Second-kind system psi = rhs - 2 D psi via a Fourier-preconditioned fixed
  // point; the same-circle part diagonalizes exactly in the angular modes.
  auto solve_system = [&](const std::vector<CVector>& rhs) {
    std::vector<CVector> psi = rhs;
    auto apply_minv = [&](std::vector<CVector>& v) {
      for (int d = 0; d < nd; ++d) {
        FourierSeries f = fourier_project(v[d], modes);
        f.cos_coeff[0] /= 1.0 + 2.0 * self_multipliers_[d][0];
        for (int m = 1; m <= modes; ++m) {
          f.cos_coeff[m] /= 1.0 + 2.0 * self_multipliers_[d][m];
          f.sin_coeff[m] /= 1.0 + 2.0 * self_multipliers_[d][m];
        }
        v[d] = fourier_synth_grid(f, nf);
      }
    };
    auto apply_a = [&](const std::vector<CVector>& v) {
      std::vector<CVector> out(nd);
      for (int d = 0; d < nd; ++d) {
        FourierSeries f = fourier_project(v[d], modes);
        f.cos_coeff[0] *= 1.0 + 2.0 * self_multipliers_[d][0];
        for (int m = 1; m <= modes; ++m) {
          f.cos_coeff[m] *= 1.0 + 2.0 * self_multipliers_[d][m];
          f.sin_coeff[m] *= 1.0 + 2.0 * self_multipliers_[d][m];
        }
        out[d] = fourier_synth_grid(f, nf);
        for (int e = 0; e < nd; ++e) {
          if (e != d) out[d] += 2.0 * (cross_[d][e] * v[e]);
        }
      }
      return out;
    };
    Real scale = 0.0;
    for (int d = 0; d < nd; ++d) scale = std::max(scale, rhs[d].cwiseAbs().maxCoeff());
    apply_minv(psi);
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<CVector> resid = apply_a(psi);
      Real worst = 0.0;
      for (int d = 0; d < nd; ++d) {
        resid[d] = rhs[d] - resid[d];
        worst = std::max(worst, resid[d].cwiseAbs().maxCoeff());
      }
      if (worst <= 1e-13 * std::max(scale, 1e-30)) return psi;
      apply_minv(resid);
      for (int d = 0; d < nd; ++d) psi[d] += resid[d];
    }
    throw std::runtime_error("helmdisk: boundary-trace fixed point failed to converge");
  };

  std::vector<CVector> rhs(nd), rhs1(nd), rhs2(nd);
  for (int d = 0; d < nd; ++d) {
    rhs[d].resize(nf);
    rhs1[d].resize(nf);
    rhs2[d].resize(nf);
    for (int j = 0; j < nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      rhs[d][j] = 2.0 * gamma_k(dom_.k, z, y);
      const CVec2 g = gamma_k_grad(dom_.k, y, z);  // grad in z of Gamma(z, y)
      rhs1[d][j] = 2.0 * g[0];
      rhs2[d][j] = 2.0 * g[1];
    }
  }
  ts.val = solve_system(rhs);
  ts.grad[0] = solve_system(rhs1);
  ts.grad[1] = solve_system(rhs2);
  return ts;
}

void DomainField::refresh_tracked() {
  rebuild_operator();
  for (int s = 0; s < sources_.count; ++s) {
    tracked_[s] = solve_traces(sources_.points[s]);
  }
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.clear();
}

const DomainField::TraceSet& DomainField::traces_for(const Point2& z) const {
  for (int s = 0; s < sources_.count; ++s) {
    if (sources_.points[s] == z) return tracked_[s];
  }
  std::lock_guard<std::mutex> lock(mutex_);
  const std::array<Real, 2> key{z.x(), z.y()};
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, solve_traces(z)).first;
  }
  return it->second;
}

Complex DomainField::eval_traces(const TraceSet& ts, const Point2& x, int) const {
  Complex acc = 0.0;
  for (int d = 0; d < static_cast<int>(dom_.disks.size()); ++d) {
    const Real w = kTwoPi / grid_.nf * dom_.disks[d].radius;
    for (int j = 0; j < grid_.nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      const Point2 nu = boundary_normal(dom_.disks[d], grid_.angles[j]);
      acc -= w * dnu_gamma(dom_.k, x, y, nu) * ts.val[d][j];
    }
  }
  return acc;
}

Complex DomainField::value(const Point2& z, const Point2& x) const {
  return gamma_k(dom_.k, z, x) + regular_value(z, x);
}

Complex DomainField::regular_value(const Point2& z, const Point2& x) const {
  if (dom_.disks.empty()) return {0.0, 0.0};
  return eval_traces(traces_for(z), x);
}

CVec2 DomainField::grad(const Point2& z, const Point2& x) const {
  return gamma_k_grad(dom_.k, z, x) + regular_grad(z, x);
}

CVec2 DomainField::regular_grad(const Point2& z, const Point2& x) const {
  if (dom_.disks.empty()) return CVec2::Zero();
  const TraceSet& ts = traces_for(z);
  CVec2 acc = CVec2::Zero();
  for (int d = 0; d < static_cast<int>(dom_.disks.size()); ++d) {
    const Real w = kTwoPi / grid_.nf * dom_.disks[d].radius;
    for (int j = 0; j < grid_.nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      const Point2 nu = boundary_normal(dom_.disks[d], grid_.angles[j]);
      // grad in x of dGamma/dnu_y (x, y): nu^T Hess acting through the mixed
      // derivative (-Hess of Gamma in its difference variable).
      const CMat2 mixed_g = -gamma_k_hessian(dom_.k, y, x);
      acc -= w * ts.val[d][j] * (mixed_g * nu.cast<Complex>());
    }
  }
  return acc;
}

CMat2 DomainField::hessian(const Point2& z, const Point2& x) const {
  CMat2 acc = gamma_k_hessian(dom_.k, z, x);
  if (dom_.disks.empty()) return acc;
  const TraceSet& ts = traces_for(z);
  const Real h = 1e-5;
  // Hessian of the smooth scattered part via gradient differences of the
  // analytic kernels.
  for (int d = 0; d < static_cast<int>(dom_.disks.size()); ++d) {
    const Real w = kTwoPi / grid_.nf * dom_.disks[d].radius;
    for (int j = 0; j < grid_.nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      const Point2 nu = boundary_normal(dom_.disks[d], grid_.angles[j]);
      for (int l = 0; l < 2; ++l) {
        Point2 e = Point2::Zero();
        e[l] = h;
        const CVec2 gp = -gamma_k_hessian(dom_.k, y, x + e) * nu.cast<Complex>();
        const CVec2 gm = -gamma_k_hessian(dom_.k, y, x - e) * nu.cast<Complex>();
        const CVec2 col = (gp - gm) / (2.0 * h) * (-w) * ts.val[d][j];
        acc(0, l) += col[0];
        acc(1, l) += col[1];
      }
    }
  }
  return acc;
}

CMat2 DomainField::mixed(const Point2& z, const Point2& x) const {
  CMat2 acc = -gamma_k_hessian(dom_.k, z, x);
  if (dom_.disks.empty()) return acc;
  const TraceSet& ts = traces_for(z);
  for (int d = 0; d < static_cast<int>(dom_.disks.size()); ++d) {
    const Real w = kTwoPi / grid_.nf * dom_.disks[d].radius;
    for (int j = 0; j < grid_.nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      const Point2 nu = boundary_normal(dom_.disks[d], grid_.angles[j]);
      const CVec2 kx = -(-gamma_k_hessian(dom_.k, y, x) * nu.cast<Complex>()) * w;
      for (int l = 0; l < 2; ++l) {
        acc(l, 0) += ts.grad[l][d][j] * kx[0];
        acc(l, 1) += ts.grad[l][d][j] * kx[1];
      }
    }
  }
  return acc;
}

CVec2 DomainField::source_grad(int source, const Point2& x) const {
  const Point2 z = sources_.points[source];
  // Gamma depends on x - z, so the z-gradient is minus the x-gradient.
  CVec2 acc = -gamma_k_grad(dom_.k, z, x);
  if (dom_.disks.empty()) return acc;
  const TraceSet& ts = tracked_[source];
  for (int d = 0; d < static_cast<int>(dom_.disks.size()); ++d) {
    const Real w = kTwoPi / grid_.nf * dom_.disks[d].radius;
    for (int j = 0; j < grid_.nf; ++j) {
      const Point2 y = boundary_point(dom_.disks[d], grid_.angles[j]);
      const Point2 nu = boundary_normal(dom_.disks[d], grid_.angles[j]);
      const Complex kern = dnu_gamma(dom_.k, x, y, nu) * w;
      acc[0] -= kern * ts.grad[0][d][j];
      acc[1] -= kern * ts.grad[1][d][j];
    }
  }
  return acc;
}

void DomainField::add_disk(const Disk& d) {
  DiskDomain next = dom_;
  next.disks.push_back(d);
  require_valid(next);
  dom_ = next;
  refresh_tracked();
}

void DomainField::set_radius(int index, Real radius) {
  DiskDomain next = dom_;
  next.disks.at(index).radius = radius;
  require_valid(next);
  dom_ = next;
  refresh_tracked();
}

ScatteringMatrix DomainField::scattering() const { return scattering_matrix(*this, sources_); }

// ---------------------------------------------------------------------------
// Greedy design loop

namespace {

bool center_feasible(const DiskDomain& dom, const Point2& zeta, Real radius,
                     const DesignParams& p) {
  if (zeta.x() < p.box_x0 || zeta.x() > p.box_x1 || zeta.y() < p.box_y0 || zeta.y() > p.box_y1) {
    return false;
  }
  // Clearance to the source segment and to every existing disk.
  if (zeta.y() - radius < p.separation_factor * radius) return false;
  for (const Disk& d : dom.disks) {
    const Real gap = (zeta - d.center).norm() - radius - d.radius;
    if (gap < p.separation_factor * std::max(radius, d.radius)) return false;
  }
  return true;
}

Real predicted_e(const DomainField& field, const CMatrix& s_base, const CMatrix& target,
                 const Point2& zeta, Real r0) {
  const SourceLine& src = field.sources();
  const int n = src.count;
  const Real k = field.domain().k;
  CVector val(n), sg2(n);
  CMatrix v(n, 2), mx(n, 2);
  for (int i = 0; i < n; ++i) {
    val[i] = field.value(src.points[i], zeta);
    const CVec2 g = field.grad(src.points[i], zeta);
    v(i, 0) = g[0];
    v(i, 1) = g[1];
    sg2[i] = field.source_grad(i, zeta)[1];
    const CMat2 m = field.mixed(src.points[i], zeta);
    mx(i, 0) = m(1, 0);
    mx(i, 1) = m(1, 1);
  }
  CMatrix s_pred = s_base;
  const Real pref = kPi * r0 * r0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      s_pred(i, j) += pref * (k * k * val[i] * sg2[j] -
                              2.0 * (v(i, 0) * mx(j, 0) + v(i, 1) * mx(j, 1)));
    }
  }
  return error_e(s_pred, target);
}

} // namespace

CenterProposal propose_center(const DomainField& field, const CMatrix& target,
                              const DesignParams& p) {
  const CMatrix s_base = field.scattering().s;
  CenterProposal best;
  best.predicted_e = std::numeric_limits<Real>::infinity();

  auto consider = [&](const Point2& zeta) {
    if (!center_feasible(field.domain(), zeta, p.probe_radius, p)) return;
    const Real e = predicted_e(field, s_base, target, zeta, p.probe_radius);
    const bool better =
        e < best.predicted_e - 1e-14 ||
        (std::abs(e - best.predicted_e) <= 1e-14 && best.feasible &&
         (zeta.y() < best.center.y() ||
          (zeta.y() == best.center.y() && zeta.x() < best.center.x())));
    if (better || !best.feasible) {
      if (e < best.predicted_e + 1e-14) {
        best.center = zeta;
        best.predicted_e = e;
        best.feasible = true;
      }
    }
  };

  const Real hx = (p.box_x1 - p.box_x0) / p.grid_nx;
  const Real hy = (p.box_y1 - p.box_y0) / p.grid_ny;
  for (int iy = 0; iy < p.grid_ny; ++iy) {
    for (int ix = 0; ix < p.grid_nx; ++ix) {
      consider({p.box_x0 + (ix + 0.5) * hx, p.box_y0 + (iy + 0.5) * hy});
    }
  }
  if (!best.feasible) return best;

  // One refinement pass around the winning cell.
  const Point2 coarse = best.center;
  for (int iy = -p.refine_factor; iy <= p.refine_factor; ++iy) {
    for (int ix = -p.refine_factor; ix <= p.refine_factor; ++ix) {
      consider({coarse.x() + ix * hx / p.refine_factor, coarse.y() + iy * hy / p.refine_factor});
    }
  }
  return best;
}

namespace {

// Scattering data of (background domain + growing circle) from the circle's
// marching state and the background field, through the peeling identities.
ScatteringMatrix peel_scattering(const DomainField& bg_field, const InflationState& st) {
  const SourceLine& src = bg_field.sources();
  const int n = src.count;
  const int nf = st.nf;
  const int modes = nf / 2 - 1;
  const Real k = st.k;
  const Real r = st.radius;
  const BoundaryGrid grid(nf);

  // Full-value modal rows of the circle state: log singular part + smooth.
  std::vector<FourierSeries> psi_rows(nf);
  for (int i = 0; i < nf; ++i) psi_rows[i] = st.row_series(i);

  // xi_i(t) = N_full(z_i, y(t)) on the circle: explicit peel through the
  // circle-circle state.
  std::vector<Point2> ypts(nf), nups(nf);
  for (int j = 0; j < nf; ++j) {
    nups[j] = Point2(std::cos(grid.angles[j]), std::sin(grid.angles[j]));
    ypts[j] = st.zeta + r * nups[j];
  }

  CMatrix xi(n, nf);
  for (int i = 0; i < n; ++i) {
    // h_i(t) = dnu_w N_bg(z_i, w(t)), smooth; its modes pair with the state.
    CVector h(nf);
    for (int j = 0; j < nf; ++j) {
      const CVec2 g = bg_field.grad(src.points[i], ypts[j]);
      h[j] = nups[j].x() * g[0] + nups[j].y() * g[1];
    }
    const FourierSeries hm = fourier_project(h, modes);
    for (int j = 0; j < nf; ++j) {
      // int Psi(t, t_j) h_i(t) dt: smooth part by modal pairing, log part by
      // the exact displaced-log spectrum.
      Complex acc = kTwoPi * psi_rows[j].cos_coeff[0] * hm.cos_coeff[0];
      for (int m = 1; m <= modes; ++m) {
        acc += kPi * (psi_rows[j].cos_coeff[m] * hm.cos_coeff[m] +
                      psi_rows[j].sin_coeff[m] * hm.sin_coeff[m]);
      }
      acc += -std::log(2.0) / kTwoPi * kTwoPi * hm.cos_coeff[0];
      for (int m = 1; m <= modes; ++m) {
        const Complex lg = -1.0 / (kPi * m) *
                           (hm.cos_coeff[m] * std::cos(m * grid.angles[j]) +
                            hm.sin_coeff[m] * std::sin(m * grid.angles[j]));
        acc += kPi * lg;
      }
      xi(i, j) = bg_field.value(src.points[i], ypts[j]) - r * acc;
    }
  }

  // S and companion through the second peel.
  ScatteringMatrix out;
  out.s.resize(n, n);
  out.companion.resize(n, n);
  std::vector<FourierSeries> xim(n);
  for (int i = 0; i < n; ++i) xim[i] = fourier_project(xi.row(i).transpose(), modes);

  for (int j = 0; j < n; ++j) {
    // Kernels at the target source z_j.
    CVector kv(nf), kd(nf);
    for (int t = 0; t < nf; ++t) {
      const CVec2 g = bg_field.grad(src.points[j], ypts[t]);
      kv[t] = nups[t].x() * g[0] + nups[t].y() * g[1];
      const CMat2 m = bg_field.mixed(src.points[j], ypts[t]);
      // d/dz_2 of dnu_y N_bg(z, y): second row of the mixed matrix dotted nu.
      kd[t] = m(1, 0) * nups[t].x() + m(1, 1) * nups[t].y();
    }
    const FourierSeries kvm = fourier_project(kv, modes);
    const FourierSeries kdm = fourier_project(kd, modes);
    for (int i = 0; i < n; ++i) {
      auto pair_int = [&](const FourierSeries& a, const FourierSeries& b) {
        Complex acc = kTwoPi * a.cos_coeff[0] * b.cos_coeff[0];
        for (int m = 1; m <= modes; ++m) {
          acc += kPi * (a.cos_coeff[m] * b.cos_coeff[m] + a.sin_coeff[m] * b.sin_coeff[m]);
        }
        return acc;
      };
      const Complex val_corr = r * pair_int(kvm, xim[i]);
      const Complex s_corr = r * pair_int(kdm, xim[i]);
      if (i == j) {
        out.companion(i, i) = gamma_coincidence_regular(k) +
                              bg_field.regular_value(src.points[i], src.points[i]) - val_corr;
        out.s(i, i) = bg_field.regular_grad(src.points[i], src.points[i])[1] - s_corr;
      } else {
        out.companion(j, i) = bg_field.value(src.points[i], src.points[j]) - val_corr;
        out.s(i, j) = bg_field.grad(src.points[i], src.points[j])[1] - s_corr;
      }
    }
  }
  return out;
}

std::shared_ptr<InflationBackground> make_growth_background(const DomainField& bg_field,
                                                            const Point2& zeta, int nf) {
  if (bg_field.domain().disks.empty()) {
    return std::make_shared<FreeInflationBackground>(bg_field.domain().k, zeta, nf);
  }
  // The field outlives the background through the shared_ptr aliasing below.
  auto ev = std::shared_ptr<const NeumannEvaluator>(&bg_field, [](const NeumannEvaluator*) {});
  return std::make_shared<EvaluatorInflationBackground>(ev, zeta, nf);
}

} // namespace

std::vector<DesignAction> grow_until_stall(DomainField& field, int index, const CMatrix& target,
                                           const DesignParams& p) {
  // Background excludes the growing disk.
  const Disk grown = field.domain().disks.at(index);
  DomainField bg_field(field.domain().k, field.sources(), field.nf());
  for (int d = 0; d < static_cast<int>(field.domain().disks.size()); ++d) {
    if (d != index) bg_field.add_disk(field.domain().disks[d]);
  }
  auto bg = make_growth_background(bg_field, grown.center, p.nf);

  InflationState st = init_state(*bg, grown.radius);
  ScatteringMatrix sm = peel_scattering(bg_field, st);
  Real e_curr = error_e(sm.s, target);

  std::vector<DesignAction> accepted;
  for (int iter = 0; iter < p.max_grow_steps; ++iter) {
    InflationState trial;
    try {
      trial = step(st, *bg, p.dr);
    } catch (const std::exception&) {
      break;  // geometry margin or mode budget hit: treated as a stall
    }
    if (!center_feasible(bg_field.domain(), trial.zeta, trial.radius, p)) break;
    const ScatteringMatrix sm_trial = peel_scattering(bg_field, trial);
    const Real e_trial = error_e(sm_trial.s, target);
    if (!(e_trial < e_curr)) break;  // stall: the last step is rolled back
    DesignAction act;
    act.kind = "grow";
    act.disk = index;
    act.center = trial.zeta;
    act.radius = trial.radius;
    act.e_before = e_curr;
    act.e_after = e_trial;
    accepted.push_back(act);
    st = trial;
    sm = sm_trial;
    e_curr = e_trial;
  }
  field.set_radius(index, st.radius);
  return accepted;
}

DesignRun design_loop(const CMatrix& target, Real k, int n_sources, const DesignParams& p) {
  DesignRun run;
  run.target = target;
  run.params = p;

  DomainField field(k, SourceLine(n_sources), p.nf);
  CMatrix s_curr = field.scattering().s;
  run.e_initial = error_e(s_curr, target);
  Real e_curr = run.e_initial;

  for (int placed = 0; placed < p.max_disks; ++placed) {
    const CenterProposal prop = propose_center(field, target, p);
    if (!prop.feasible) break;

    // Place a probe disk and measure the actual error.
    DomainField trial = field;
    trial.add_disk({prop.center, p.probe_radius});
    const Real e_place = error_e(trial.scattering().s, target);
    if (!(e_place < e_curr)) break;  // the best candidate does not reduce e

    DesignAction act;
    act.kind = "place";
    act.disk = static_cast<int>(field.domain().disks.size());
    act.center = prop.center;
    act.radius = p.probe_radius;
    act.e_before = e_curr;
    act.e_after = e_place;
    field = std::move(trial);
    e_curr = e_place;
    run.history.push_back(act);

    const std::vector<DesignAction> growth = grow_until_stall(field, act.disk, target, p);
    for (const DesignAction& g : growth) {
      run.history.push_back(g);
      e_curr = g.e_after;
    }
    // Keep the bookkeeping consistent with the committed field.
    e_curr = error_e(field.scattering().s, target);
  }

  run.e_final = e_curr;
  run.domain = field.domain();
  return run;
}

} // namespace helmdisk
