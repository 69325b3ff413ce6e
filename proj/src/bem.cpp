#include "helmdisk/bem.hpp"

#include "helmdisk/special_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace helmdisk {

namespace {

// Same-circle kernels carry their arc-length factor and split into
//   kernel(dt) = log_coeff(dt) * log(4 sin^2(dt/2)) + smooth(dt),
// both factors analytic in the angle difference dt.

struct Split {
  Complex log_coeff;
  Complex smooth;
};

// Normal-derivative (adjoint double-layer) kernel d Gamma / d nu_x * a on one
// circle of radius a; continuous with diagonal value 1/(4 pi).
Split kprime_split(Real a, Real k, Real dt) {
  const Real s = std::abs(std::sin(0.5 * dt));
  if (s < 1e-14) return {Complex(0.0, 0.0), Complex(1.0 / (4.0 * kPi), 0.0)};
  const Real w = 2.0 * a * k * s;
  const HankelPair h = hankel1_01(w);
  const Complex m = Complex(0.0, 0.25) * k * a * h.h1 * s;
  const Real log_coeff = -(k * a / (4.0 * kPi)) * h.h1.real() * s;  // -(ka/4pi) J1(w) |sin|
  return {Complex(log_coeff, 0.0), m - log_coeff * std::log(4.0 * s * s)};
}

// Single-layer kernel Gamma * a on one circle of radius a.
Split slayer_split(Real a, Real k, Real dt) {
  const Real s = std::abs(std::sin(0.5 * dt));
  if (s < 1e-14) {
    const Complex diag = a * (Complex(0.0, -0.25) +
                              (std::log(a * k / 2.0) + kEulerGamma) / kTwoPi);
    return {Complex(a / (4.0 * kPi), 0.0), diag};
  }
  const Real w = 2.0 * a * k * s;
  const HankelPair h = hankel1_01(w);
  const Complex g = Complex(0.0, -0.25) * a * h.h0;
  const Real log_coeff = a / (4.0 * kPi) * h.h0.real();  // (a/4pi) J0(w)
  return {Complex(log_coeff, 0.0), g - log_coeff * std::log(4.0 * s * s)};
}

// d Gamma / d nu at point x with unit normal nu, other argument y.
Complex kprime_point(Real k, const Point2& x, const Point2& nu, const Point2& y) {
  const Point2 diff = x - y;
  const Real d = diff.norm();
  return Complex(0.0, 0.25) * k * hankel1_1(k * d) * (nu.dot(diff) / d);
}

// 2 Gamma(dist(dt)) - (1/2pi) log(1 - cos dt) on a circle of radius a: the
// explicit part of the smooth on-boundary splitting.
Complex doubled_gamma_minus_log(Real a, Real k, Real dt) {
  const Real s = std::abs(std::sin(0.5 * dt));
  if (s < 1e-14) {
    return Complex((std::log(a * k) + kEulerGamma) / kPi - std::log(2.0) / kTwoPi, -0.5);
  }
  const Complex g = Complex(0.0, -0.5) * hankel1_0(2.0 * a * k * s);
  return g - std::log1p(-std::cos(dt)) / kTwoPi;
}

} // namespace

// ---------------------------------------------------------------------------
// FreeSpaceEvaluator

Complex FreeSpaceEvaluator::value(const Point2& z, const Point2& x) const {
  return gamma_k(dom_.k, z, x);
}
CVec2 FreeSpaceEvaluator::grad(const Point2& z, const Point2& x) const {
  return gamma_k_grad(dom_.k, z, x);
}
CMat2 FreeSpaceEvaluator::hessian(const Point2& z, const Point2& x) const {
  return gamma_k_hessian(dom_.k, z, x);
}
CMat2 FreeSpaceEvaluator::mixed(const Point2& z, const Point2& x) const {
  return -gamma_k_hessian(dom_.k, z, x);
}

// ---------------------------------------------------------------------------
// BemSystem

BemSystem::BemSystem(DiskDomain dom, int nc_per_disk) : dom_(std::move(dom)), nc_(nc_per_disk) {
  require_valid(dom_);
  if (dom_.disks.empty()) throw std::invalid_argument("helmdisk: BemSystem needs at least one disk");
  if (nc_ < 8 || nc_ % 2 != 0) throw std::invalid_argument("helmdisk: N_c must be even and >= 8");

  const int nd = static_cast<int>(dom_.disks.size());
  total_ = nd * nc_;
  const Real k = dom_.k;
  const RVector w_table = log_sin_weight_table(nc_);

  CMatrix a(total_, total_);
  for (int d = 0; d < nd; ++d) {
    const Real rad = dom_.disks[d].radius;

    // Same-disk block: circulant in the angle difference.
    CVector entry(nc_);
    for (int m = 0; m < nc_; ++m) {
      const Split sp = kprime_split(rad, k, kTwoPi * m / nc_);
      entry[m] = w_table[m] * sp.log_coeff + kTwoPi / nc_ * sp.smooth;
    }
    for (int i = 0; i < nc_; ++i) {
      for (int j = 0; j < nc_; ++j) {
        a(d * nc_ + i, d * nc_ + j) = entry[(i - j + nc_) % nc_];
      }
    }

    // Cross-disk blocks: smooth kernels, plain trapezoid weights.
    for (int e = 0; e < nd; ++e) {
      if (e == d) continue;
      const Real we = kTwoPi / nc_ * dom_.disks[e].radius;
      for (int i = 0; i < nc_; ++i) {
        const Point2 xi = node(d, i);
        const Point2 nui = boundary_normal(dom_.disks[d], node_angle(i));
        for (int j = 0; j < nc_; ++j) {
          a(d * nc_ + i, e * nc_ + j) = we * kprime_point(k, xi, nui, node(e, j));
        }
      }
    }
  }
  a.diagonal().array() += Complex(0.5, 0.0);

  lu_.compute(a);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 0.0) || !std::isfinite(rcond_)) {
    throw std::runtime_error("helmdisk: BEM factorization failed (singular system)");
  }
  if (rcond_ < 1e-12) {
    std::ostringstream os;
    os << "helmdisk: BEM system nearly singular (rcond " << rcond_
       << "); wavenumber close to an interior resonance";
    throw std::runtime_error(os.str());
  }
}

Point2 BemSystem::node(int disk, int j) const {
  return boundary_point(dom_.disks[disk], node_angle(j));
}

CVector BemSystem::solve(const Point2& z) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CVector b(total_);
  for (int d = 0; d < nd; ++d) {
    for (int i = 0; i < nc_; ++i) {
      const Real t = node_angle(i);
      b[d * nc_ + i] = -kprime_point(dom_.k, node(d, i), boundary_normal(dom_.disks[d], t), z);
    }
  }
  return lu_.solve(b);
}

CMatrix BemSystem::solve_many(const std::vector<Point2>& zs) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CMatrix b(total_, static_cast<int>(zs.size()));
  for (int s = 0; s < static_cast<int>(zs.size()); ++s) {
    for (int d = 0; d < nd; ++d) {
      for (int i = 0; i < nc_; ++i) {
        const Real t = node_angle(i);
        b(d * nc_ + i, s) =
            -kprime_point(dom_.k, node(d, i), boundary_normal(dom_.disks[d], t), zs[s]);
      }
    }
  }
  return lu_.solve(b);
}

CMatrix BemSystem::solve_many_dir(const std::vector<Point2>& zs,
                                  const std::vector<Point2>& dirs) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CMatrix b(total_, static_cast<int>(zs.size()));
  for (int s = 0; s < static_cast<int>(zs.size()); ++s) {
    for (int d = 0; d < nd; ++d) {
      for (int i = 0; i < nc_; ++i) {
        const Real t = node_angle(i);
        const Point2 nu = boundary_normal(dom_.disks[d], t);
        const CVec2 row = gamma_k_hessian(dom_.k, zs[s], node(d, i)) * nu.cast<Complex>();
        b(d * nc_ + i, s) = dirs[s].x() * row[0] + dirs[s].y() * row[1];
      }
    }
  }
  return lu_.solve(b);
}

std::array<CVector, 2> BemSystem::solve_source_grad(const Point2& z) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CMatrix b(total_, 2);
  for (int d = 0; d < nd; ++d) {
    for (int i = 0; i < nc_; ++i) {
      const Real t = node_angle(i);
      const Point2 nu = boundary_normal(dom_.disks[d], t);
      // d/dz_l of -dGamma/dnu_x (z, x_i) equals +(Hess_x Gamma . nu)_l.
      const CVec2 row = gamma_k_hessian(dom_.k, z, node(d, i)) * nu.cast<Complex>();
      b(d * nc_ + i, 0) = row[0];
      b(d * nc_ + i, 1) = row[1];
    }
  }
  CMatrix sol = lu_.solve(b);
  return {sol.col(0), sol.col(1)};
}

CVector BemSystem::solve_on_boundary(int disk, Real angle) const {
  const int nd = static_cast<int>(dom_.disks.size());
  const Real rad = dom_.disks[disk].radius;
  const Point2 z0 = boundary_point(dom_.disks[disk], angle);
  CVector b(total_);
  for (int d = 0; d < nd; ++d) {
    for (int i = 0; i < nc_; ++i) {
      const Real t = node_angle(i);
      if (d == disk) {
        const Real dt = t - angle;
        const Split sp = kprime_split(rad, dom_.k, dt);
        const Real s = std::abs(std::sin(0.5 * dt));
        const Complex kernel =
            (s < 1e-14) ? sp.smooth / rad
                        : (sp.log_coeff * std::log(4.0 * s * s) + sp.smooth) / rad;
        b[d * nc_ + i] = -2.0 * kernel;
      } else {
        b[d * nc_ + i] =
            -2.0 * kprime_point(dom_.k, node(d, i), boundary_normal(dom_.disks[d], t), z0);
      }
    }
  }
  return lu_.solve(b);
}

Complex BemSystem::layer_value(const CVector& phi, const Point2& x) const {
  const int nd = static_cast<int>(dom_.disks.size());
  Complex acc = 0.0;
  for (int d = 0; d < nd; ++d) {
    const Real w = kTwoPi / nc_ * dom_.disks[d].radius;
    for (int j = 0; j < nc_; ++j) {
      acc += w * gamma_k(dom_.k, node(d, j), x) * phi[d * nc_ + j];
    }
  }
  return acc;
}

CVec2 BemSystem::layer_grad(const CVector& phi, const Point2& x) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CVec2 acc = CVec2::Zero();
  for (int d = 0; d < nd; ++d) {
    const Real w = kTwoPi / nc_ * dom_.disks[d].radius;
    for (int j = 0; j < nc_; ++j) {
      acc += w * phi[d * nc_ + j] * gamma_k_grad(dom_.k, node(d, j), x);
    }
  }
  return acc;
}

CMat2 BemSystem::layer_hessian(const CVector& phi, const Point2& x) const {
  const int nd = static_cast<int>(dom_.disks.size());
  CMat2 acc = CMat2::Zero();
  for (int d = 0; d < nd; ++d) {
    const Real w = kTwoPi / nc_ * dom_.disks[d].radius;
    for (int j = 0; j < nc_; ++j) {
      acc += w * phi[d * nc_ + j] * gamma_k_hessian(dom_.k, node(d, j), x);
    }
  }
  return acc;
}

Complex BemSystem::layer_value_on_boundary(const CVector& phi, int disk, Real angle) const {
  const int nd = static_cast<int>(dom_.disks.size());
  const Real rad = dom_.disks[disk].radius;
  const Point2 x = boundary_point(dom_.disks[disk], angle);
  const RVector rw = log_sin_weights(nc_, angle);
  Complex acc = 0.0;
  for (int j = 0; j < nc_; ++j) {
    const Split sp = slayer_split(rad, dom_.k, angle - node_angle(j));
    acc += (rw[j] * sp.log_coeff + kTwoPi / nc_ * sp.smooth) * phi[disk * nc_ + j];
  }
  for (int e = 0; e < nd; ++e) {
    if (e == disk) continue;
    const Real w = kTwoPi / nc_ * dom_.disks[e].radius;
    for (int j = 0; j < nc_; ++j) {
      acc += w * gamma_k(dom_.k, node(e, j), x) * phi[e * nc_ + j];
    }
  }
  return acc;
}

Complex BemSystem::adjoint_layer_on_boundary(const CVector& phi, int disk, Real angle) const {
  const int nd = static_cast<int>(dom_.disks.size());
  const Real rad = dom_.disks[disk].radius;
  const Point2 x = boundary_point(dom_.disks[disk], angle);
  const Point2 nu = boundary_normal(dom_.disks[disk], angle);
  const RVector rw = log_sin_weights(nc_, angle);
  Complex acc = 0.0;
  for (int j = 0; j < nc_; ++j) {
    const Split sp = kprime_split(rad, dom_.k, angle - node_angle(j));
    acc += (rw[j] * sp.log_coeff + kTwoPi / nc_ * sp.smooth) * phi[disk * nc_ + j];
  }
  for (int e = 0; e < nd; ++e) {
    if (e == disk) continue;
    const Real w = kTwoPi / nc_ * dom_.disks[e].radius;
    for (int j = 0; j < nc_; ++j) {
      acc += w * kprime_point(dom_.k, x, nu, node(e, j)) * phi[e * nc_ + j];
    }
  }
  return acc;
}

Complex BemSystem::density_at(const CVector& phi, int disk, Real angle) const {
  const CVector slice = phi.segment(disk * nc_, nc_);
  return fourier_synth(fourier_project(slice, nc_ / 2 - 1), angle);
}

// ---------------------------------------------------------------------------
// BemEvaluator

BemEvaluator::BemEvaluator(DiskDomain dom, int nc_per_disk) : free_(dom.k) {
  if (!dom.disks.empty()) {
    sys_ = std::make_shared<BemSystem>(std::move(dom), nc_per_disk);
  } else {
    require_valid(dom);
  }
}

void BemEvaluator::check_exterior(const Point2& p, const char* who) const {
  for (const Disk& d : domain().disks) {
    if ((p - d.center).norm() <= d.radius * (1.0 + 1e-12)) {
      throw std::domain_error(std::string("helmdisk: ") + who + ": point inside or on a disk");
    }
  }
}

const BemEvaluator::CacheEntry& BemEvaluator::density(const Point2& z, bool need_grad) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::array<Real, 2> key{z.x(), z.y()};
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    CacheEntry entry;
    entry.phi = sys_->solve(z);
    it = cache_.emplace(key, std::move(entry)).first;
  }
  if (need_grad && !it->second.has_grad) {
    it->second.dphi = sys_->solve_source_grad(z);
    it->second.has_grad = true;
  }
  return it->second;
}

Complex BemEvaluator::value(const Point2& z, const Point2& x) const {
  if (!sys_) return free_.value(z, x);
  check_exterior(z, "value");
  check_exterior(x, "value");
  return gamma_k(domain().k, z, x) + sys_->layer_value(density(z, false).phi, x);
}

CVec2 BemEvaluator::grad(const Point2& z, const Point2& x) const {
  if (!sys_) return free_.grad(z, x);
  check_exterior(z, "grad");
  check_exterior(x, "grad");
  return gamma_k_grad(domain().k, z, x) + sys_->layer_grad(density(z, false).phi, x);
}

CMat2 BemEvaluator::hessian(const Point2& z, const Point2& x) const {
  if (!sys_) return free_.hessian(z, x);
  check_exterior(z, "hessian");
  check_exterior(x, "hessian");
  return gamma_k_hessian(domain().k, z, x) + sys_->layer_hessian(density(z, false).phi, x);
}

CMat2 BemEvaluator::mixed(const Point2& z, const Point2& x) const {
  if (!sys_) return free_.mixed(z, x);
  check_exterior(z, "mixed");
  check_exterior(x, "mixed");
  const CacheEntry& entry = density(z, true);
  CMat2 out = -gamma_k_hessian(domain().k, z, x);
  for (int l = 0; l < 2; ++l) {
    const CVec2 g = sys_->layer_grad(entry.dphi[l], x);
    out(l, 0) += g[0];
    out(l, 1) += g[1];
  }
  return out;
}

Complex BemEvaluator::regular_value(const Point2& z, const Point2& x) const {
  if (!sys_) return {0.0, 0.0};
  check_exterior(z, "regular_value");
  check_exterior(x, "regular_value");
  return sys_->layer_value(density(z, false).phi, x);
}

CVec2 BemEvaluator::regular_grad(const Point2& z, const Point2& x) const {
  if (!sys_) return CVec2::Zero();
  check_exterior(z, "regular_grad");
  check_exterior(x, "regular_grad");
  return sys_->layer_grad(density(z, false).phi, x);
}

BoundaryTrace BemEvaluator::boundary_trace(const Point2& z, int disk,
                                           const BoundaryGrid& grid) const {
  if (!sys_) throw std::invalid_argument("helmdisk: boundary_trace needs a nonempty domain");
  check_exterior(z, "boundary_trace");
  BoundaryTrace tr;
  tr.disk = disk;
  tr.angles = grid.angles;
  tr.values.resize(grid.nf);
  const CVector& phi = density(z, false).phi;
  for (int j = 0; j < grid.nf; ++j) {
    const Point2 y = boundary_point(domain().disks[disk], grid.angles[j]);
    tr.values[j] =
        gamma_k(domain().k, z, y) + sys_->layer_value_on_boundary(phi, disk, grid.angles[j]);
  }
  tr.smooth = tr.values;
  tr.split_active = false;
  return tr;
}

BoundaryTrace BemEvaluator::boundary_trace_on(int disk, Real source_angle,
                                              const BoundaryGrid& grid) const {
  if (!sys_) throw std::invalid_argument("helmdisk: boundary_trace_on needs a nonempty domain");
  const Real rad = domain().disks[disk].radius;
  const CVector phi = sys_->solve_on_boundary(disk, source_angle);

  BoundaryTrace tr;
  tr.disk = disk;
  tr.angles = grid.angles;
  tr.split_active = true;
  tr.source_angle = source_angle;
  tr.values.resize(grid.nf);
  tr.smooth.resize(grid.nf);
  for (int j = 0; j < grid.nf; ++j) {
    const Real dt = source_angle - grid.angles[j];
    tr.smooth[j] = doubled_gamma_minus_log(rad, domain().k, dt) +
                   sys_->layer_value_on_boundary(phi, disk, grid.angles[j]);
    const Real one_minus_cos = 1.0 - std::cos(dt);
    tr.values[j] = (one_minus_cos > 0.0)
                       ? tr.smooth[j] + std::log(one_minus_cos) / kTwoPi
                       : Complex(std::numeric_limits<Real>::quiet_NaN(), 0.0);
  }
  return tr;
}

CMatrix BemEvaluator::boundary_pair_smooth(int disk, const BoundaryGrid& grid) const {
  if (!sys_) throw std::invalid_argument("helmdisk: boundary_pair_smooth needs a nonempty domain");
  const int nc = sys_->nc();
  const int nf = grid.nf;
  if (nc % nf != 0) {
    throw std::invalid_argument("helmdisk: boundary_pair_smooth needs N_c divisible by N_f");
  }
  const int stride = nc / nf;
  const int nd = static_cast<int>(domain().disks.size());
  const Real rad = domain().disks[disk].radius;
  const Real k = domain().k;

  // Lattice tables for the traced circle.
  const RVector w_table = log_sin_weight_table(nc);
  CVector log_coeff(nc), smooth(nc), fconst(nc);
  for (int m = 0; m < nc; ++m) {
    const Split sp = slayer_split(rad, k, kTwoPi * m / nc);
    log_coeff[m] = sp.log_coeff;
    smooth[m] = sp.smooth;
    fconst[m] = doubled_gamma_minus_log(rad, k, kTwoPi * m / nc);
  }

  // Cross-disk trace kernels, weights folded in.
  std::vector<CMatrix> cross(nd);
  for (int e = 0; e < nd; ++e) {
    if (e == disk) continue;
    cross[e].resize(nf, nc);
    const Real w = kTwoPi / nc * domain().disks[e].radius;
    for (int i = 0; i < nf; ++i) {
      const Point2 x = boundary_point(domain().disks[disk], grid.angles[i]);
      for (int j = 0; j < nc; ++j) {
        cross[e](i, j) = w * gamma_k(k, sys_->node(e, j), x);
      }
    }
  }

  CMatrix out(nf, nf);
  for (int i = 0; i < nf; ++i) {
    const CVector phi = sys_->solve_on_boundary(disk, grid.angles[i]);
    for (int j = 0; j < nf; ++j) {
      Complex acc = fconst[((i - j) * stride % nc + nc) % nc];
      for (int m = 0; m < nc; ++m) {
        const int idx = ((j * stride - m) % nc + nc) % nc;
        acc += (w_table[idx] * log_coeff[idx] + kTwoPi / nc * smooth[idx]) * phi[disk * nc + m];
      }
      for (int e = 0; e < nd; ++e) {
        if (e == disk) continue;
        acc += (cross[e].row(j) * phi.segment(e * nc, nc))(0);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Complex circle_gamma_regular(Real radius, Real k, Real dt) {
  const Split sp = slayer_split(radius, k, dt);
  const Real s = std::abs(std::sin(0.5 * dt));
  if (s < 1e-14) return sp.smooth / radius;
  // Gamma - (1/4pi)log(4 sin^2) = (A/a - 1/4pi) log(4 sin^2) + B/a.
  return (sp.log_coeff / radius - 1.0 / (4.0 * kPi)) * std::log(4.0 * s * s) +
         sp.smooth / radius;
}

Complex circle_gamma_dnu(Real radius, Real k, Real dt) {
  const Split sp = kprime_split(radius, k, dt);
  const Real s = std::abs(std::sin(0.5 * dt));
  if (s < 1e-14) return sp.smooth / radius;
  return (sp.log_coeff * std::log(4.0 * s * s) + sp.smooth) / radius;
}

Real boundary_residual(const BemSystem& sys, const CVector& phi, const Point2& z) {
  const int nc = sys.nc();
  const int nd = static_cast<int>(sys.domain().disks.size());
  Real worst = 0.0;
  for (int d = 0; d < nd; ++d) {
    const FourierSeries dens = fourier_project(phi.segment(d * nc, nc), nc / 2 - 1);
    for (int i = 0; i < nc; ++i) {
      const Real s = sys.node_angle(i) + kPi / nc;  // midpoint
      const Point2 x = boundary_point(sys.domain().disks[d], s);
      const Point2 nu = boundary_normal(sys.domain().disks[d], s);
      const Complex resid = kprime_point(sys.domain().k, x, nu, z) +
                            0.5 * fourier_synth(dens, s) +
                            sys.adjoint_layer_on_boundary(phi, d, s);
      worst = std::max(worst, std::abs(resid));
    }
  }
  return worst;
}

} // namespace helmdisk
