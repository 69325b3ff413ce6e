#include "helmdisk/inflation.hpp"

#include "helmdisk/asymptotics.hpp"
#include "helmdisk/special_functions.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace helmdisk {

namespace {

// --------------------------------------------------------------------------
// Closed-form circle kernels between shells of radius hi >= lo around the
// same center, as functions of the angle difference.

// d Gamma / d nu at the lo-shell point.
Complex gamma_dnu_cross(Real k, Real hi, Real lo, Real theta) {
  const Real d2 = hi * hi + lo * lo - 2.0 * hi * lo * std::cos(theta);
  const Real d = std::sqrt(d2);
  return Complex(0.0, 0.25) * k * hankel1_1(k * d) * ((lo - hi * std::cos(theta)) / d);
}

// Mixed d/dnu_hi d/dnu_lo Gamma(y_hi, w_lo).
Complex gamma_dd_cross(Real k, Real hi, Real lo, Real theta) {
  const Real c = std::cos(theta);
  const Real d2 = hi * hi + lo * lo - 2.0 * hi * lo * c;
  const Real d = std::sqrt(d2);
  const HankelPair h = hankel1_01(k * d);
  const Complex fp = Complex(0.0, 0.25) * k * h.h1;
  const Complex fpp = Complex(0.0, 0.25) * k * k * (h.h0 - h.h1 / (k * d));
  const Real alpha = (lo * c - hi) / d;  // nu_hi . u, u = (w - y)/d
  const Real beta = (lo - hi * c) / d;   // nu_lo . u
  return -(fpp * alpha * beta + fp / d * (c - alpha * beta));
}

// Poisson-type subtraction kernels of the splitting.
Real poisson_p(Real hi, Real lo, Real theta) {
  return (lo - hi * std::cos(theta)) /
         (kTwoPi * (hi * hi + lo * lo - 2.0 * hi * lo * std::cos(theta)));
}

Real poisson_pp(Real hi, Real lo, Real theta) {
  const Real den = hi * hi + lo * lo - 2.0 * hi * lo * std::cos(theta);
  return -(2.0 * hi * lo - (hi * hi + lo * lo) * std::cos(theta)) / (kTwoPi * den * den);
}


// Modal data of many rows at once: f_i(t) = c(i,0) + sum_n c(i,n) cos + s(i,n) sin.
struct Modal {
  CMatrix c, s;
};

Modal project_rows(const CMatrix& samples) {
  const int rows = static_cast<int>(samples.rows());
  const int nf = static_cast<int>(samples.cols());
  const int modes = nf / 2 - 1;
  Modal out{CMatrix(rows, modes + 1), CMatrix(rows, modes + 1)};
  for (int i = 0; i < rows; ++i) {
    const FourierSeries f = fourier_project(samples.row(i).transpose(), modes);
    out.c.row(i) = f.cos_coeff.transpose();
    out.s.row(i) = f.sin_coeff.transpose();
  }
  return out;
}

CMatrix synth_rows(const Modal& m, int nf) {
  const int rows = static_cast<int>(m.c.rows());
  CMatrix out(rows, nf);
  FourierSeries f;
  for (int i = 0; i < rows; ++i) {
    f.cos_coeff = m.c.row(i).transpose();
    f.sin_coeff = m.s.row(i).transpose();
    out.row(i) = fourier_synth_grid(f, nf).transpose();
  }
  return out;
}

// int f_a(t) g_b(t) dt over [-pi, pi) for all row pairs:
// 2 pi a0 b0 + pi sum_n (ac bc + as bs).
CMatrix parseval(const Modal& a, const Modal& b) {
  CMatrix ac = a.c;
  ac.col(0) *= 2.0;
  CMatrix out = ac * b.c.transpose();
  out.noalias() += a.s * b.s.transpose();
  return kPi * out;
}

void scale_modes(Modal& m, const RVector& factor) {
  for (int n = 0; n < factor.size(); ++n) {
    m.c.col(n) *= factor[n];
    m.s.col(n) *= factor[n];
  }
}

void check_clearance(const DiskDomain& dom, const Point2& zeta, Real radius) {
  for (const Disk& d : dom.disks) {
    const Real gap = (zeta - d.center).norm() - radius - d.radius;
    if (gap <= 1e-3 * std::min(radius, d.radius)) {
      std::ostringstream os;
      os << "helmdisk: growing circle (r = " << radius
         << ") touches a background obstacle (gap " << gap << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

} // namespace

// --------------------------------------------------------------------------
// Backgrounds

FreeInflationBackground::FreeInflationBackground(Real k, Point2 zeta, int nf)
    : zeta_(zeta), grid_(nf) {
  dom_.k = k;
}

StepBackground FreeInflationBackground::make(Real, Real) const {
  return {};  // empty background: no scattered part
}

EvaluatorInflationBackground::EvaluatorInflationBackground(
    std::shared_ptr<const NeumannEvaluator> ev, Point2 zeta, int nf)
    : ev_(std::move(ev)), zeta_(zeta), grid_(nf) {}

StepBackground EvaluatorInflationBackground::make(Real r, Real big_r) const {
  const int nf = grid_.nf;
  const Real k = wavenumber();
  StepBackground out;
  out.us_nn.resize(nf, nf);
  out.us_dn_cross.resize(nf, nf);
  out.us_dn_same.resize(nf, nf);
  out.us_dd_cross.resize(nf, nf);
  std::vector<Point2> ph(nf), pl(nf), nu(nf);
  for (int i = 0; i < nf; ++i) {
    nu[i] = Point2(std::cos(grid_.angles[i]), std::sin(grid_.angles[i]));
    ph[i] = zeta_ + big_r * nu[i];
    pl[i] = zeta_ + r * nu[i];
  }
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) {
      const CVec2 nuj = nu[j].cast<Complex>();
      out.us_nn(i, j) = ev_->regular_value(ph[i], ph[j]);
      {
        const CVec2 g = ev_->regular_grad(ph[i], pl[j]);
        out.us_dn_cross(i, j) = nuj[0] * g[0] + nuj[1] * g[1];
      }
      {
        const CVec2 g = ev_->regular_grad(ph[i], ph[j]);
        out.us_dn_same(i, j) = nuj[0] * g[0] + nuj[1] * g[1];
      }
      {
        // Scattered mixed part: full mixed minus the free-space part (-Hess).
        const CMat2 m = ev_->mixed(ph[i], pl[j]) + gamma_k_hessian(k, ph[i], pl[j]);
        const CVec2 nui = nu[i].cast<Complex>();
        out.us_dd_cross(i, j) = (nui.transpose() * m * nuj)(0);
      }
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// BEM-backed background with batched density solves.

struct BemInflationBackground::Shell {
  Real rho = 0.0;
  std::vector<Point2> pts;
  CMatrix phi;      // (ntot x nf) densities per shell source
  CMatrix phi_nu;   // densities of the radial source derivative
};

BemInflationBackground::BemInflationBackground(std::shared_ptr<const BemSystem> sys, Point2 zeta,
                                               int nf)
    : sys_(std::move(sys)), zeta_(zeta), grid_(nf) {}

Complex BemInflationBackground::regular_at_center() const {
  const CVector phi = sys_->solve(zeta_);
  return sys_->layer_value(phi, zeta_);
}

BemInflationBackground::Shell BemInflationBackground::build_shell(Real rho) const {
  Shell s;
  s.rho = rho;
  s.pts.resize(grid_.nf);
  std::vector<Point2> dirs(grid_.nf);
  for (int i = 0; i < grid_.nf; ++i) {
    dirs[i] = Point2(std::cos(grid_.angles[i]), std::sin(grid_.angles[i]));
    s.pts[i] = zeta_ + rho * dirs[i];
  }
  s.phi = sys_->solve_many(s.pts);
  s.phi_nu = sys_->solve_many_dir(s.pts, dirs);
  return s;
}

StepBackground BemInflationBackground::make(Real r, Real big_r) const {
  const int nf = grid_.nf;
  const Real k = wavenumber();
  const int ntot = sys_->unknowns();
  const int nc = sys_->nc();
  const int nd = static_cast<int>(sys_->domain().disks.size());

  const Shell hi = build_shell(big_r);
  const Shell lo = build_shell(r);

  // Kernel blocks, quadrature weights folded in: value and normal-derivative
  // of the layer kernel at shell targets.
  auto kernel_blocks = [&](const Shell& sh, CMatrix& kval, CMatrix& kdnu) {
    kval.resize(nf, ntot);
    kdnu.resize(nf, ntot);
    for (int i = 0; i < nf; ++i) {
      const Point2 x = sh.pts[i];
      const Point2 nu(std::cos(grid_.angles[i]), std::sin(grid_.angles[i]));
      for (int d = 0; d < nd; ++d) {
        const Real w = kTwoPi / nc * sys_->domain().disks[d].radius;
        for (int j = 0; j < nc; ++j) {
          const Point2 y = sys_->node(d, j);
          const Point2 diff = x - y;
          const Real dist = diff.norm();
          const HankelPair h = hankel1_01(k * dist);
          kval(i, d * nc + j) = w * Complex(0.0, -0.25) * h.h0;
          kdnu(i, d * nc + j) =
              w * Complex(0.0, 0.25) * k * h.h1 * (nu.dot(diff) / dist);
        }
      }
    }
  };
  CMatrix kval_hi, kdnu_hi, kval_lo, kdnu_lo;
  kernel_blocks(hi, kval_hi, kdnu_hi);
  kernel_blocks(lo, kval_lo, kdnu_lo);

  // Scattered parts: target-block times source densities gives
  // u(source s, target t) at (t, s); transpose to (source, target).
  const CMatrix u_val_hh = (kval_hi * hi.phi).transpose();
  const CMatrix u_dnu_hl = (kdnu_lo * hi.phi).transpose();
  const CMatrix u_dnu_hh = (kdnu_hi * hi.phi).transpose();
  const CMatrix u_dd_hl = (kdnu_lo * hi.phi_nu).transpose();

  StepBackground out;
  out.us_nn = u_val_hh;
  out.us_dn_cross = u_dnu_hl;
  out.us_dn_same = u_dnu_hh;
  out.us_dd_cross = u_dd_hl;
  return out;
}

// --------------------------------------------------------------------------
// State

FourierSeries InflationState::row_series(int i) const {
  return fourier_project(smooth.row(i).transpose(), nf / 2 - 1);
}

Complex InflationState::value(Real t_a, Real t_b) const {
  const Real omc = 1.0 - std::cos(t_a - t_b);
  if (!(omc > 0.0)) throw std::invalid_argument("helmdisk: coincident boundary angles");
  // Nearest grid row for t_a, spectral in t_b.
  const Real pos = (t_a + kPi) * nf / kTwoPi;
  const int i = ((static_cast<int>(std::lround(pos)) % nf) + nf) % nf;
  if (std::abs(pos - std::lround(pos)) > 1e-9) {
    throw std::invalid_argument("helmdisk: source angle must be a grid angle");
  }
  return std::log(omc) / kTwoPi + fourier_synth(row_series(i), t_b);
}

Real InflationState::symmetry_residual() const {
  return (smooth - smooth.transpose()).cwiseAbs().maxCoeff();
}

InflationState init_state(const InflationBackground& bg, Real r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("helmdisk: seed radius must be positive");
  if (bg.wavenumber() * r0 > kMaxKr) {
    throw std::invalid_argument("helmdisk: seed radius outside the small-kr regime");
  }
  check_clearance(bg.domain(), bg.center(), r0);
  InflationState st;
  st.zeta = bg.center();
  st.k = bg.wavenumber();
  st.radius = r0;
  st.nf = bg.grid().nf;
  const Complex block =
      (2.0 * std::log(st.k * r0) + 2.0 * kEulerGamma - kImag * kPi) / (4.0 * kPi) +
      bg.regular_at_center();
  st.smooth = CMatrix::Constant(st.nf, st.nf, block);
  return st;
}

InflationState step(const InflationState& st, const InflationBackground& bg, Real dr,
                    const StepOptions& opt) {
  if (dr < 0.0) throw std::invalid_argument("helmdisk: negative radius increment");
  if (dr == 0.0) return st;
  const Real r = st.radius;
  const Real big_r = r + dr;
  if (dr > 0.5 * r) throw std::invalid_argument("helmdisk: step too large (dr <= r/2)");
  check_clearance(bg.domain(), st.zeta, big_r);

  const int nf = st.nf;
  const int modes = nf / 2 - 1;
  const Real rho1 = r / big_r;
  const Real rho2 = rho1 * rho1;
  const Real k = st.k;

  RVector rho1n(modes + 1), rho2n(modes + 1), nrho1n(modes + 1);
  for (int n = 0; n <= modes; ++n) {
    rho1n[n] = std::pow(rho1, n);
    rho2n[n] = std::pow(rho2, n);
    nrho1n[n] = n * rho1n[n];
  }

  const StepBackground bgd = bg.make(r, big_r);
  const bool empty_bg = bgd.us_nn.size() == 0;
  const Modal state_m = project_rows(st.smooth);

  // Modal coefficients of the even free-space difference kernels, projected
  // from an oversampled grid so their slowly decaying near-singular tails
  // (spectra ~ (r/R)^n) do not alias onto the resolved modes.
  const int fine = 8 * nf;
  auto even_modes = [&](const std::function<Complex(Real)>& f) {
    CVector samp(fine);
    for (int j = 0; j < fine; ++j) samp[j] = f(-kPi + kTwoPi * j / fine);
    return fourier_project(samp, modes).cos_coeff;
  };
  const CVector nn_hat = even_modes([&](Real th) { return circle_gamma_regular(big_r, k, th); });
  const CVector ng_hat = even_modes([&](Real th) {
    return gamma_dnu_cross(k, big_r, r, th) - poisson_p(big_r, r, th);
  });
  const CVector same_hat = even_modes([&](Real th) {
    return circle_gamma_dnu(big_r, k, th) - 1.0 / (4.0 * kPi * big_r);
  });
  const CVector mg_hat = even_modes([&](Real th) {
    return gamma_dd_cross(k, big_r, r, th) - poisson_pp(big_r, r, th);
  });
  // Per-row modal form of kernel(t_row - t).
  auto rotate = [&](const CVector& fhat) {
    Modal m{CMatrix(nf, modes + 1), CMatrix::Zero(nf, modes + 1)};
    for (int i = 0; i < nf; ++i) {
      const Real ti = bg.grid().angles[i];
      m.c(i, 0) = fhat[0];
      for (int n = 1; n <= modes; ++n) {
        m.c(i, n) = fhat[n] * std::cos(n * ti);
        m.s(i, n) = fhat[n] * std::sin(n * ti);
      }
    }
    return m;
  };
  auto add_modal = [](Modal a, const Modal& b) {
    a.c += b.c;
    a.s += b.s;
    return a;
  };

  // Lifted-trace modes: L_tz = c_log(tz - .) + c0 + state row tz.
  // c_log carries the exact slowly-decaying spectrum of the displaced log.
  const RVector chat = log_kernel_fourier(big_r, r, modes);
  const Real c0_lift = std::log(big_r / r) / kTwoPi - dr / (kTwoPi * r);
  Modal lmodes = state_m;
  {
    RVector cosmz(modes + 1), sinmz(modes + 1);
    for (int i = 0; i < nf; ++i) {
      const Real tz = bg.grid().angles[i];
      lmodes.c(i, 0) += chat[0] + c0_lift;
      for (int n = 1; n <= modes; ++n) {
        lmodes.c(i, n) += chat[n] * std::cos(n * tz);
        lmodes.s(i, n) += chat[n] * std::sin(n * tz);
      }
    }
  }

  // G-tilde(tz, tx): both points lifted to radius R, smooth part.
  Modal n_modal = rotate(ng_hat);
  if (!empty_bg) n_modal = add_modal(n_modal, project_rows(bgd.us_dn_cross));
  const CMatrix i_n = parseval(n_modal, lmodes);  // (tx, tz)
  Modal half = state_m;
  {
    // The Poisson kernel has no constant mode: the n = 0 state mode drops out.
    RVector f = rho1n;
    f *= 0.5;
    f[0] = 0.0;
    scale_modes(half, f);
  }
  CMatrix gt = synth_rows(add_modal(rotate(nn_hat), half), nf) - r * i_n.transpose();
  if (!empty_bg) gt += bgd.us_nn;

  // kappa-tilde(tx, t): normal-derivative trace on the R-circle with its
  // explicit singular parts removed; O(dr) overall. The near-singular
  // rational family produced by the Poisson-kernel convolution of the
  // displaced log cancels the split's rational term exactly, so neither is
  // ever sampled.
  Modal m_modal = rotate(mg_hat);
  if (!empty_bg) m_modal = add_modal(m_modal, project_rows(bgd.us_dd_cross));
  const CMatrix i_m = parseval(m_modal, lmodes);  // (t, tx)
  Modal dl = state_m;
  {
    RVector f = nrho1n;
    f /= 2.0 * big_r;
    scale_modes(dl, f);
  }
  Modal kap_part = rotate(same_hat);
  if (!empty_bg) kap_part = add_modal(kap_part, project_rows(bgd.us_dn_same));
  kap_part.c -= dl.c;
  kap_part.s -= dl.s;
  CMatrix kap = synth_rows(kap_part, nf);
  kap -= r * i_m.transpose();

  // K(tz, tx) = 2R int kappa-tilde(tx, t) [G_sing(tz - t) + G-tilde(tz, t)] dt.
  const Modal kap_m = project_rows(kap);
  Modal sig{CMatrix::Zero(nf, modes + 1), CMatrix::Zero(nf, modes + 1)};
  for (int i = 0; i < nf; ++i) {
    const Real tz = bg.grid().angles[i];
    for (int n = 1; n <= modes; ++n) {
      const Real sn = -(1.0 + rho2n[n]) / (kTwoPi * n);
      sig.c(i, n) = sn * std::cos(n * tz);
      sig.s(i, n) = sn * std::sin(n * tz);
    }
  }
  CMatrix big_k = parseval(kap_m, sig).transpose();       // (tz, tx)
  big_k.noalias() += kTwoPi / nf * (gt * kap.transpose());
  big_k *= 2.0 * big_r;

  // Mode solve: (1 + rho2^n) P_n = 2 G~_n - K_n; constant mode carries the
  // log 2 shift from the zero mode of the singular splitting.
  const Modal g_m = project_rows(gt);
  const Modal k_m = project_rows(big_k);
  Modal out_m{CMatrix(nf, modes + 1), CMatrix(nf, modes + 1)};
  if (opt.form == StepForm::stable) {
    out_m.c.col(0) = g_m.c.col(0).array() + std::log(2.0) / kTwoPi - 0.5 * k_m.c.col(0).array();
    out_m.s.col(0).setZero();
    for (int n = 1; n <= modes; ++n) {
      const Real den = 1.0 + rho2n[n];
      out_m.c.col(n) = (2.0 * g_m.c.col(n) - k_m.c.col(n)) / den;
      out_m.s.col(n) = (2.0 * g_m.s.col(n) - k_m.s.col(n)) / den;
    }
  } else {
    // Explicit variant: substitute the current state on the implicit side.
    out_m.c.col(0) = 2.0 * g_m.c.col(0).array() + std::log(2.0) / kPi -
                     k_m.c.col(0).array() - state_m.c.col(0).array();
    out_m.s.col(0).setZero();
    for (int n = 1; n <= modes; ++n) {
      out_m.c.col(n) = 2.0 * g_m.c.col(n) - k_m.c.col(n) - rho2n[n] * state_m.c.col(n);
      out_m.s.col(n) = 2.0 * g_m.s.col(n) - k_m.s.col(n) - rho2n[n] * state_m.s.col(n);
    }
  }

  // Mode-energy sanity: refuse when the top quartile carries too much.
  Real total = 0.0, top = 0.0;
  for (int n = 1; n <= modes; ++n) {
    const Real e = out_m.c.col(n).squaredNorm() + out_m.s.col(n).squaredNorm();
    total += e;
    if (n >= (3 * modes) / 4) top += e;
  }
  if (total > 0.0 && top > opt.mode_energy_cap * total) {
    std::ostringstream os;
    os << "helmdisk: marching step rejected: top-quartile mode energy fraction "
       << top / total << " exceeds " << opt.mode_energy_cap << " (increase N_f)";
    throw std::runtime_error(os.str());
  }

  InflationState out;
  out.zeta = st.zeta;
  out.k = k;
  out.radius = big_r;
  out.nf = nf;
  out.smooth = synth_rows(out_m, nf);
  // The marched object is symmetric (N(a,b) = N(b,a)); project onto the
  // symmetric subspace, where the recursion is contractive. The discarded
  // antisymmetric component is pure discretization noise and is reported by
  // symmetry_residual before it is damped here.
  out.asymmetry = 0.5 * (out.smooth - out.smooth.transpose()).cwiseAbs().maxCoeff();
  out.smooth = 0.5 * (out.smooth + out.smooth.transpose()).eval();
  return out;
}

InflationState march(InflationState st, const InflationBackground& bg, Real r_target,
                     const MarchOptions& opt, std::vector<MarchRecord>* log) {
  if (!(r_target > st.radius)) {
    throw std::invalid_argument("helmdisk: march target must exceed the current radius");
  }
  check_clearance(bg.domain(), st.zeta, r_target);
  int index = 0;
  while (st.radius < r_target - 1e-14) {
    const Real dr = std::min({opt.dr_max, opt.growth_cap * st.radius, r_target - st.radius});
    st = step(st, bg, dr, opt.step);
    if (log != nullptr) {
      log->push_back({index, st.radius, dr, st.asymmetry});
    }
    ++index;
  }
  return st;
}

} // namespace helmdisk
