#pragma once

// Alternating fixed-rank manifold estimation of the IRS→BS channel G and the
// UE→IRS channel H from uplink training, with ℓ1 sparsity penalties on their
// angular coefficients.

#include <utility>
#include <vector>

#include "irsce/channel.hpp"
#include "irsce/manifold.hpp"

namespace irsce {

struct MoEstConfig {
  double mu_g = 0.0;
  double mu_h = 0.0;
  Index p_hat = 3;
  Index q_hat = 3;
  double eps_inner = 1e-3;
  double eps_outer = 1e-3;
  int max_outer = 100;
  int max_inner = 300;

  void validate() const;
};

struct MoEstResult {
  FixedRankPoint g_hat;
  FixedRankPoint h_hat;
  std::vector<double> trace;  // objective at the initial point, then per outer iteration
  int iterations = 0;
  bool inner_stalled = false;

  /// Ĥᵀ ⊙ Ĝ, free of the diagonal and scalar ambiguity of the factors.
  CMatrix cascaded() const;
};

/// Regularization weight 10⁻²·σ²·T used when none is supplied.
double default_mu(const PilotBlock& pilots);

/// Column t is diag(v_t)·Ĥ·s_t.
CMatrix stack_reflected(const CMatrix& h_hat, const PilotBlock& pilots);

double objective_f(const CMatrix& g_hat, const CMatrix& h_hat,
                   const PilotBlock& pilots, const Dictionaries& dict, double mu_g,
                   double mu_h);
double objective_f(const CMatrix& g_hat, const CMatrix& h_hat,
                   const PilotBlock& pilots, const Dictionaries& dict,
                   const MoEstConfig& cfg);

/// ∂f/∂X* of ‖R − X·F‖² + μ_G‖A_BSᴴ X A_I‖₁.
CMatrix egrad_g(const CMatrix& x, const CMatrix& r_mat, const CMatrix& f_mat,
                double mu_g, const Dictionaries& dict);

/// ∂f/∂Ĥ* of Σ_t ‖r_t − Ĝ diag(v_t) Ĥ s_t‖² + μ_H‖A_Iᴴ Ĥ A_UE‖₁.
CMatrix egrad_h(const CMatrix& h_hat, const CMatrix& g_hat, const PilotBlock& pilots,
                double mu_h, const Dictionaries& dict);

MoEstResult mo_est(const PilotBlock& pilots, const Dictionaries& dict,
                   const MoEstConfig& cfg, Rng& rng);

/// Picks the (μ_G, μ_H) pair with the smallest residual on held-out slots
/// (every fifth slot), scanning grid_g outermost; ties keep the first pair.
/// Every candidate starts from the same random initialization.
std::pair<double, double> tune_mu(const PilotBlock& pilots, const Dictionaries& dict,
                                  const MoEstConfig& base,
                                  const std::vector<double>& grid_g,
                                  const std::vector<double>& grid_h, Rng& rng);

}  // namespace irsce
