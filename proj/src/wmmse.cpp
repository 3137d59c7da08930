#include "irsce/wmmse.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace irsce {

namespace {

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CMatrix hpd_inverse(const CMatrix& a) {
  const CMatrix h = hermitian_part(a);
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("wmmse: matrix expected positive definite is not");
  }
  return hermitian_part(llt.solve(CMatrix::Identity(h.rows(), h.cols())));
}

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("wmmse: log-determinant of a non positive definite matrix");
  }
  double out = 0.0;
  for (Index i = 0; i < a.rows(); ++i) out += 2.0 * std::log(llt.matrixLLT()(i, i).real());
  return out;
}

// (Ω⁻¹ + Ω⁻¹FᴴH_eᴴH_eF/σ²) and Ω⁻¹
struct G1Parts {
  CMatrix h_e;
  CMatrix omega_inv;
  CMatrix t;
};

G1Parts g1_parts(const CVector& v, const CMatrix& f, const CMatrix& omega,
                 const DownlinkScenario& scen) {
  G1Parts p;
  p.h_e = effective_channel(scen.h_c, v, scen.n_bs, scen.n_ue);
  p.omega_inv = hpd_inverse(omega);
  const CMatrix hf = p.h_e * f;
  p.t = p.omega_inv + p.omega_inv * (hf.adjoint() * hf) / scen.sigma2_d;
  return p;
}

void check_dims(const CMatrix& h_e, const CMatrix& f, const DownlinkScenario& scen) {
  if (h_e.rows() != scen.n_ue || h_e.cols() != scen.n_bs || f.rows() != scen.n_bs) {
    throw ShapeError("wmmse: channel or beamformer shape does not match the scenario");
  }
}

BeamformingSolution run(const DownlinkScenario& scen, CVector v0, bool optimize_v,
                        const WmmseOptions& opts) {
  scen.validate();
  if (!(opts.eps3 > 0.0) || opts.max_outer < 1) {
    throw ConfigError("WmmseOptions: eps3 must be > 0 and max_outer >= 1");
  }
  BeamformingSolution sol;
  sol.v_d = CirclePoint{std::move(v0)};
  CMatrix h_e = effective_channel(scen.h_c, sol.v_d.v, scen.n_bs, scen.n_ue);
  sol.f = initial_beamformer(h_e, scen.n_s);
  WOmega wo = update_w_omega(h_e, sol.f, scen);
  sol.w = wo.w;
  sol.omega = wo.omega;
  double g_prev = wmmse_objective(h_e, sol.f, sol.w, sol.omega, scen);
  sol.g_trace.push_back(g_prev);

  const ComplexCircleManifold circle;
  for (int it = 0; it < opts.max_outer; ++it) {
    if (optimize_v) {
      const CMatrix f = sol.f;
      const CMatrix omega = sol.omega;
      auto cost = [&](const CirclePoint& x) { return g1_objective(x.v, f, omega, scen); };
      auto grad = [&](const CirclePoint& x) -> CVector {
        return 2.0 * egrad_v(x.v, f, omega, scen);
      };
      auto res = cg_minimize(circle, cost, grad, sol.v_d, opts.inner);
      sol.stalled = sol.stalled || res.stalled;
      sol.v_d = std::move(res.x);
      h_e = effective_channel(scen.h_c, sol.v_d.v, scen.n_bs, scen.n_ue);
    }
    wo = update_w_omega(h_e, sol.f, scen);
    sol.w = std::move(wo.w);
    sol.omega = std::move(wo.omega);
    FUpdate fu = update_f(h_e, sol.w, sol.omega, sol.f, scen);
    if (fu.fallback) ++sol.f_fallbacks;
    sol.f = std::move(fu.f);

    ++sol.iterations;
    const double g = wmmse_objective(h_e, sol.f, sol.w, sol.omega, scen);
    sol.g_trace.push_back(g);
    if (g_prev - g <= opts.eps3) break;
    g_prev = g;
  }
  sol.se = spectral_efficiency(h_e, sol.f, scen);
  return sol;
}

}  // namespace

double DownlinkScenario::prefactor() const {
  return 1.0 - static_cast<double>(t_used) / static_cast<double>(t_tot);
}

void DownlinkScenario::validate() const {
  if (n_bs < 1 || n_ue < 1 || h_c.rows() != n_bs * n_ue || h_c.cols() < 1) {
    throw ShapeError("DownlinkScenario: cascaded channel must be (N_BS·N_UE) × M");
  }
  if (!(sigma2_d > 0.0)) throw ConfigError("DownlinkScenario: sigma2_d must be > 0");
  if (n_s < 1 || n_s > std::min(n_bs, n_ue)) {
    throw ConfigError("DownlinkScenario: n_s must lie in [1, min(N_BS, N_UE)]");
  }
  if (t_tot < 1 || t_used < 0 || t_used >= t_tot) {
    throw ConfigError("DownlinkScenario: need 0 <= T < T_tot");
  }
}

double spectral_efficiency(const CMatrix& h_e, const CMatrix& f,
                           const DownlinkScenario& scen) {
  check_dims(h_e, f, scen);
  const CMatrix hf = h_e * f;
  const CMatrix a =
      CMatrix::Identity(f.cols(), f.cols()) + hf.adjoint() * hf / scen.sigma2_d;
  return scen.prefactor() * log_det_hpd(a) / std::numbers::ln2;
}

CMatrix mse_matrix(const CMatrix& h_e, const CMatrix& f, const CMatrix& w,
                   const DownlinkScenario& scen) {
  check_dims(h_e, f, scen);
  const CMatrix whf = w.adjoint() * h_e * f;
  const CMatrix e = CMatrix::Identity(f.cols(), f.cols()) - whf.adjoint() - whf +
                    scen.sigma2_d * (w.adjoint() * w) + whf * whf.adjoint();
  return hermitian_part(e);
}

WOmega update_w_omega(const CMatrix& h_e, const CMatrix& f,
                      const DownlinkScenario& scen) {
  check_dims(h_e, f, scen);
  const CMatrix hf = h_e * f;
  const CMatrix cov = hf * hf.adjoint() + scen.sigma2_d * CMatrix::Identity(h_e.rows(), h_e.rows());
  WOmega out;
  out.w = hermitian_part(cov).llt().solve(hf);
  out.omega = hpd_inverse(mse_matrix(h_e, f, out.w, scen));
  return out;
}

double wmmse_objective(const CMatrix& h_e, const CMatrix& f, const CMatrix& w,
                       const CMatrix& omega, const DownlinkScenario& scen) {
  const CMatrix e = mse_matrix(h_e, f, w, scen);
  return (omega * e).trace().real() - log_det_hpd(omega);
}

CMatrix closed_form_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega,
                      const DownlinkScenario& scen, bool* degenerate) {
  const CMatrix hw = h_e.adjoint() * w;  // N_BS × N_s
  const double psi = (omega * w.adjoint() * w).trace().real();
  const Index n = h_e.cols();
  const CMatrix lhs = hw * omega * hw.adjoint() +
                      scen.sigma2_d * psi * CMatrix::Identity(n, n);
  const CMatrix rhs = hw * omega;
  CMatrix f_tilde;
  if (psi > 0.0) {
    f_tilde = lhs.partialPivLu().solve(rhs);
  } else {
    f_tilde = CMatrix::Zero(n, omega.cols());
  }
  const double nrm = f_tilde.norm();
  if (degenerate != nullptr) *degenerate = !(nrm > 0.0) || !std::isfinite(nrm);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return CMatrix::Zero(n, omega.cols());
  return f_tilde / nrm;
}

CMatrix exact_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega) {
  // min −2Re tr(ΩWᴴH_eF) + tr(FᴴCF) s.t. ‖F‖_F = 1, C = H_eᴴWΩWᴴH_e.
  // Stationary points F(λ) = (C + λI)⁻¹B with B = H_eᴴWΩ.
  const CMatrix hw = h_e.adjoint() * w;
  const CMatrix c = hermitian_part(hw * omega * hw.adjoint());
  const CMatrix b = hw * omega;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(c);
  const RVector lam = eig.eigenvalues();  // ascending
  const CMatrix& u = eig.eigenvectors();
  const CMatrix ub = u.adjoint() * b;
  const RVector row_sq = ub.rowwise().squaredNorm();
  const Index n = c.rows();
  const double tol = 1e-12 * std::max(lam(n - 1), 1e-300);

  auto norm_sq = [&](double shift) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = lam(i) + shift;
      if (d > tol) s += row_sq(i) / (d * d);
    }
    return s;
  };
  auto build = [&](double shift) {
    CMatrix z = CMatrix::Zero(n, b.cols());
    for (Index i = 0; i < n; ++i) {
      const double d = lam(i) + shift;
      if (d > tol) z.row(i) = ub.row(i) / d;
    }
    return CMatrix(u * z);
  };

  if (norm_sq(0.0) > 1.0) {
    double lo = 0.0;
    double hi = 1.0;
    while (norm_sq(hi) > 1.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (norm_sq(mid) > 1.0 ? lo : hi) = mid;
    }
    CMatrix f = build(hi);
    return f / f.norm();
  }

  // Interior optimum: pad with null-space directions of C, which leave the
  // objective unchanged, to make the power constraint tight.
  CMatrix f = build(0.0);
  const double deficit = 1.0 - f.squaredNorm();
  Index nullity = 0;
  while (nullity < n && lam(nullity) <= tol) ++nullity;
  const Index spread = std::min<Index>(nullity, f.cols());
  if (deficit > 0.0 && spread > 0) {
    const double amp = std::sqrt(deficit / static_cast<double>(spread));
    for (Index k = 0; k < spread; ++k) f.col(k) += amp * u.col(k);
  }
  return f;
}

FUpdate update_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega,
                 const CMatrix& f_old, const DownlinkScenario& scen) {
  check_dims(h_e, f_old, scen);
  FUpdate out;
  out.f = closed_form_f(h_e, w, omega, scen, &out.degenerate);
  if (out.degenerate) return out;
  const double g_old = wmmse_objective(h_e, f_old, w, omega, scen);
  const double g_new = wmmse_objective(h_e, out.f, w, omega, scen);
  if (g_new > g_old) {
    CMatrix f_exact = exact_f(h_e, w, omega);
    if (wmmse_objective(h_e, f_exact, w, omega, scen) <= g_new) {
      out.f = std::move(f_exact);
      out.fallback = true;
    }
  }
  return out;
}

double g1_objective(const CVector& v, const CMatrix& f, const CMatrix& omega,
                    const DownlinkScenario& scen) {
  const G1Parts p = g1_parts(v, f, omega, scen);
  return p.t.partialPivLu().inverse().trace().real();
}

CVector egrad_v(const CVector& v, const CMatrix& f, const CMatrix& omega,
                const DownlinkScenario& scen) {
  if (v.size() != scen.m()) throw ShapeError("egrad_v: reflection length mismatch");
  const G1Parts p = g1_parts(v, f, omega, scen);
  const CMatrix t_inv = p.t.partialPivLu().inverse();
  const CMatrix k = t_inv * t_inv * p.omega_inv;
  // ∂g₁/∂v* = −(1/σ²)·H_cᵀ·vec((H_e F Kᴴ Fᴴ)ᵀ), K = T⁻²Ω⁻¹
  const CMatrix m = (p.h_e * f * k.adjoint() * f.adjoint()).transpose();
  return -(scen.h_c.transpose() * vec(m)) / scen.sigma2_d;
}

CMatrix initial_beamformer(const CMatrix& h_e, Index n_s) {
  if (n_s < 1 || n_s > h_e.cols()) throw ShapeError("initial_beamformer: bad stream count");
  Eigen::JacobiSVD<CMatrix> svd(h_e, Eigen::ComputeFullV);
  return svd.matrixV().leftCols(n_s) / std::sqrt(static_cast<double>(n_s));
}

BeamformingSolution alt_wmmse(const DownlinkScenario& scen, Rng& rng,
                              const WmmseOptions& opts) {
  return run(scen, random_unit_modulus(scen.m(), rng), true, opts);
}

BeamformingSolution wmmse_fixed_reflection(const DownlinkScenario& scen,
                                           const CVector& v, const WmmseOptions& opts) {
  if (v.size() != scen.m()) throw ShapeError("wmmse_fixed_reflection: length mismatch");
  return run(scen, v, false, opts);
}

}  // namespace irsce
