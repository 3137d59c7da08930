#pragma once

// Downlink transmit beamforming and passive reflection design by alternating
// WMMSE updates, with the reflection vector optimized on the complex circle.

#include <vector>

#include "irsce/channel.hpp"
#include "irsce/manifold.hpp"

namespace irsce {

struct DownlinkScenario {
  CMatrix h_c;  // N_BS·N_UE × M cascaded channel
  Index n_bs = 0;
  Index n_ue = 0;
  double sigma2_d = 1.0;
  Index n_s = 3;
  Index t_used = 0;
  Index t_tot = 2000;

  Index m() const { return h_c.cols(); }
  /// Fraction of the coherence block left for data, 1 − T/T_tot.
  double prefactor() const;
  void validate() const;
};

struct BeamformingSolution {
  CMatrix f;      // N_BS × N_s
  CirclePoint v_d;
  CMatrix w;      // N_UE × N_s
  CMatrix omega;  // N_s × N_s
  std::vector<double> g_trace;
  int iterations = 0;
  bool stalled = false;
  int f_fallbacks = 0;  // F updates that used the exact constrained minimizer
  double se = 0.0;      // spectral efficiency on the scenario's own channel
};

/// prefactor·log₂|I + FᴴH_eᴴH_eF/σ_d²| in bits/s/Hz.
double spectral_efficiency(const CMatrix& h_e, const CMatrix& f,
                           const DownlinkScenario& scen);

/// E = I − FᴴH_eᴴW − WᴴH_eF + σ_d²WᴴW + WᴴH_eFFᴴH_eᴴW.
CMatrix mse_matrix(const CMatrix& h_e, const CMatrix& f, const CMatrix& w,
                   const DownlinkScenario& scen);

struct WOmega {
  CMatrix w;
  CMatrix omega;
};
/// MMSE receiver and its inverse error covariance.
WOmega update_w_omega(const CMatrix& h_e, const CMatrix& f,
                      const DownlinkScenario& scen);

/// g = Re tr(ΩE) − log|Ω|.
double wmmse_objective(const CMatrix& h_e, const CMatrix& f, const CMatrix& w,
                       const CMatrix& omega, const DownlinkScenario& scen);

struct FUpdate {
  CMatrix f;
  bool degenerate = false;  // F̃ = 0, f returned as zero
  bool fallback = false;    // closed form rejected, exact minimizer used
};

/// Normalized closed form F = F̃/‖F̃‖_F with
/// F̃ = (H_eᴴWΩWᴴH_e + σ_d²ψI)⁻¹H_eᴴWΩ, ψ = tr(ΩWᴴW).
CMatrix closed_form_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega,
                      const DownlinkScenario& scen, bool* degenerate = nullptr);

/// Exact minimizer of g over ‖F‖_F = 1 for fixed W, Ω.
CMatrix exact_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega);

/// Closed-form update; when it would raise g above its value at f_old the
/// exact minimizer is returned instead.
FUpdate update_f(const CMatrix& h_e, const CMatrix& w, const CMatrix& omega,
                 const CMatrix& f_old, const DownlinkScenario& scen);

/// g₁ = tr((Ω⁻¹ + Ω⁻¹FᴴH_eᴴH_eF/σ_d²)⁻¹) with H_e built from (h_c, v).
double g1_objective(const CVector& v, const CMatrix& f, const CMatrix& omega,
                    const DownlinkScenario& scen);

/// ∂g₁/∂v*.
CVector egrad_v(const CVector& v, const CMatrix& f, const CMatrix& omega,
                const DownlinkScenario& scen);

/// Top-n_s right singular vectors of h_e scaled to unit Frobenius norm.
CMatrix initial_beamformer(const CMatrix& h_e, Index n_s);

struct WmmseOptions {
  double eps3 = 1e-3;
  int max_outer = 200;
  CgOptions inner{};
};

/// Alternating optimization from a random unit-modulus v_d.
BeamformingSolution alt_wmmse(const DownlinkScenario& scen, Rng& rng,
                              const WmmseOptions& opts = {});

/// W, Ω, F iterations only, with the reflection vector held at v.
BeamformingSolution wmmse_fixed_reflection(const DownlinkScenario& scen,
                                           const CVector& v,
                                           const WmmseOptions& opts = {});

}  // namespace irsce
