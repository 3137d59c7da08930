#pragma once

// Three-stage compressive-sensing estimation of the cascaded channel: UE
// angles of departure from slots with a held reflection vector, BS angles of
// arrival from all slots, then the sparse cascaded gains.

#include <cstdint>
#include <vector>

#include "irsce/channel.hpp"

namespace irsce {

struct CsEstConfig {
  Index t1 = 0;  // 0 selects ceil(T/4)
  Index p_hat = 3;
  Index q_hat = 3;
  // Upper bound on p_hat·q_hat·G_I, the column count of the stage-3 sensing
  // matrix (which is never stored; the bound caps per-iteration work).
  Index max_columns = Index{1} << 24;

  /// Resolved T₁ for a block of `slots` slots.
  Index resolved_t1(Index slots) const;
  void validate(Index slots) const;
};

/// Complex multiply-accumulate tally.
struct OpCounter {
  std::uint64_t macs = 0;
  void add(std::uint64_t n) { macs += n; }
};

struct OmpResult {
  std::vector<Index> support;         // selection order
  CMatrix coeffs;                     // |support| × obs.cols
  CMatrix residual;                   // obs − Θ̄·coeffs
  std::vector<double> residual_norms; // ‖obs‖_F, then after every selection
};

/// Simultaneous OMP: each step adds the atom with the largest row energy of
/// Θᴴ·R_res divided by the atom's squared norm (lowest index on ties; zero
/// atoms are never preferred) and refits every selected coefficient by
/// least squares against obs. Throws NumericalError when the selected atoms
/// are numerically collinear.
OmpResult omp_mmv(const CMatrix& theta, const CMatrix& obs, Index k,
                  OpCounter* ops = nullptr);

/// Stage-1 sensing matrix Θ = S₁ᴴ·A_UE (row t is s_tᴴ·A_UE).
CMatrix stage1_sensing(const PilotBlock& pilots, const Dictionaries& dict, Index t1);

struct StageSelection {
  std::vector<Index> support;  // dictionary column indices
  CMatrix atoms;               // the selected dictionary columns
};

StageSelection stage1_ue_aods(const PilotBlock& pilots, const Dictionaries& dict,
                              const CsEstConfig& cfg, OpCounter* ops = nullptr);
StageSelection stage2_bs_aoas(const PilotBlock& pilots, const Dictionaries& dict,
                              const CsEstConfig& cfg, OpCounter* ops = nullptr);

/// G_I × G_I permutation L_j with A_Iᵀ ∘ (1·a_jᴴ) = (1/√M)·L_j·A_Iᵀ, where
/// a_j is column j of A_I. Requires every IRS grid resolution to be even.
CMatrix permutation_l(const Dictionaries& dict, Index j);

/// Dense stage-3 sensing matrix: block row t is (v_tᵀA_I) ⊗ (s_tᵀĀ_UE*) ⊗ Ā_BS,
/// column index j·(PQ) + q·P + p. Used only for small problems and checks.
CMatrix stage3_sensing(const PilotBlock& pilots, const CMatrix& a_ue_bar,
                       const CMatrix& a_bs_bar, const Dictionaries& dict);

struct Stage3Result {
  std::vector<Index> support;
  CVector lambda;   // length P̂·Q̂·G_I
  CMatrix h_c_hat;  // (Ā_UE* ⊗ Ā_BS)·mat(λ, P̂Q̂, G_I)·A_Iᵀ
};

Stage3Result stage3_gains(const PilotBlock& pilots, const CMatrix& a_ue_bar,
                          const CMatrix& a_bs_bar, const Dictionaries& dict,
                          const CsEstConfig& cfg, OpCounter* ops = nullptr);

struct CsEstResult {
  StageSelection ue;
  StageSelection bs;
  Stage3Result gains;
  double stage_ms[3] = {0.0, 0.0, 0.0};
  std::uint64_t stage_macs[3] = {0, 0, 0};

  const CMatrix& h_c_hat() const { return gains.h_c_hat; }
  std::uint64_t total_macs() const { return stage_macs[0] + stage_macs[1] + stage_macs[2]; }
};

CsEstResult cs_est(const PilotBlock& pilots, const Dictionaries& dict,
                   const CsEstConfig& cfg);

}  // namespace irsce
