#pragma once

// Saleh-Valenzuela channel synthesis for the BS-IRS-UE link, angular
// dictionaries, cascaded/effective channels and the uplink training model.

#include <vector>

#include "irsce/numerics.hpp"

namespace irsce {

struct SystemGeometry {
  Index n_bs = 16;
  Index n_ue = 8;
  Index m_y = 4;
  Index m_z = 4;
  Index g_bs = 16;
  Index g_ue = 8;
  Index g_y = 4;
  Index g_z = 4;
  double d_bi = 150.0;
  double d_iu = 10.0;

  Index m() const { return m_y * m_z; }
  Index g_i() const { return g_y * g_z; }

  /// Throws ConfigError on non-positive counts or distances.
  void validate() const;
  /// Additionally requires every dictionary resolution to cover its array.
  void validate_dictionaries() const;
  /// Copy with every resolution equal to its array size.
  SystemGeometry with_unitary_dictionaries() const;
};

/// Large-scale gain 10^(−6.14 − 2·log₁₀ d) for a link of length d metres.
double pathloss(double distance_m);

/// One path of the IRS→BS channel G. Angles are in radians; the u_* fields
/// are the spatial frequencies that actually enter the steering vectors.
struct IrsBsPath {
  cplx gain;
  double aoa = 0.0;      // at the BS
  double aod_az = 0.0;   // at the IRS
  double aod_el = 0.0;
  double u_bs = 0.0;     // cos(aoa)
  double u_y = 0.0;      // sin(aod_az)·sin(aod_el)
  double u_z = 0.0;      // cos(aod_el)
};

/// One path of the UE→IRS channel H.
struct UeIrsPath {
  cplx gain;
  double aoa_az = 0.0;   // at the IRS
  double aoa_el = 0.0;
  double aod = 0.0;      // at the UE
  double u_y = 0.0;
  double u_z = 0.0;
  double u_ue = 0.0;     // cos(aod)
};

struct PathSet {
  std::vector<IrsBsPath> g_paths;
  std::vector<UeIrsPath> h_paths;

  Index p() const { return static_cast<Index>(g_paths.size()); }
  Index q() const { return static_cast<Index>(h_paths.size()); }
};

struct SamplingOptions {
  /// Snap every spatial frequency to the nearest dictionary grid value.
  bool on_grid = false;
  /// Draw gains with unit LoS variance instead of the physical pathloss τ.
  bool normalized_gains = false;
};

struct ChannelRealization {
  CMatrix g;  // N_BS × M
  CMatrix h;  // M × N_UE
  PathSet paths;
};

struct Dictionaries {
  CMatrix a_bs;  // N_BS × G_BS
  CMatrix a_ue;  // N_UE × G_UE
  CMatrix a_y;   // M_y × G_y
  CMatrix a_z;   // M_z × G_z
  CMatrix a_i;   // M × G_I, equal to a_y ⊗ a_z
  RVector grid_bs;
  RVector grid_ue;
  RVector grid_y;
  RVector grid_z;

  bool unitary() const;
};

/// Half-wavelength ULA response: entry k is e^{jπku}/√n.
CVector steering_ula(double u, Index n);

/// UPA response a_y(θ,φ) ⊗ a_z(φ) with a_y = f(sinθ·sinφ, m_y) and
/// a_z = f(cosφ, m_z).
CVector steering_irs(double theta, double phi, Index m_y, Index m_z);

/// Same response parameterised directly by its two spatial frequencies.
CVector steering_irs_freq(double u_y, double u_z, Index m_y, Index m_z);

/// Uniform grid −1 + 2i/g, i = 0..g−1.
RVector angular_grid(Index g);

/// Nearest grid value to u on the circle of period 2.
double snap_to_grid(double u, Index g);

/// Draws P paths for G and Q paths for H. LoS (index 0) gains have variance
/// τ, the remaining ones 10^{−0.5}·τ. Angles are uniform on (0, 2π]; draws
/// whose spatial frequencies collide within 1e−6 are redrawn.
PathSet sample_paths(const SystemGeometry& geom, Index p, Index q, Rng& rng,
                     SamplingOptions opts = {});
PathSet sample_paths(const SystemGeometry& geom, Index k, Rng& rng,
                     SamplingOptions opts = {});

ChannelRealization synth_channels(const SystemGeometry& geom,
                                  const PathSet& paths);

Dictionaries build_dictionaries(const SystemGeometry& geom);

struct AngularCoefficients {
  CMatrix lambda_g;  // A_BSᴴ G A_I
  CMatrix lambda_h;  // A_Iᴴ H A_UE
};

/// Requires unitary dictionaries (every resolution equal to its array size).
AngularCoefficients angular_coefficients(const ChannelRealization& ch,
                                         const Dictionaries& dict);

/// H_c = Hᵀ ⊙ G, shape N_BS·N_UE × M.
CMatrix cascaded(const CMatrix& g, const CMatrix& h);
CMatrix cascaded(const ChannelRealization& ch);

/// H_e = mat(K·H_c*·v), the N_UE × N_BS end-to-end channel Hᴴ diag(v) Gᴴ.
CMatrix effective_channel(const CMatrix& h_c, const CVector& v, Index n_bs,
                          Index n_ue);
CMatrix effective_channel(const CMatrix& h_c, const CVector& v,
                          const SystemGeometry& geom);

struct PilotBlock {
  CMatrix s;  // N_UE × T, column t is s_t
  CMatrix v;  // M × T, column t is v_t
  CMatrix r;  // N_BS × T, column t is r_t
  double noise_power = 0.0;
  double p_tr = 1.0;

  Index slots() const { return r.cols(); }
  /// Restriction to the listed slot indices.
  PilotBlock select(const std::vector<Index>& slots) const;
};

/// Training sequences: s_t with unit-modulus entries scaled to ‖s_t‖² = p_tr,
/// v_t unit modulus. When hold_slots > 0 the first hold_slots reflection
/// vectors are identical (the three-stage compressive-sensing protocol).
struct TrainingPilots {
  CMatrix s;
  CMatrix v;
};
TrainingPilots make_training_pilots(const SystemGeometry& geom, Index slots,
                                    double p_tr, Index hold_slots, Rng& rng);

/// r_t = G·diag(v_t)·H·s_t + z_t with z_t ~ CN(0, σ²I).
PilotBlock simulate_uplink(const ChannelRealization& ch, const CMatrix& s,
                           const CMatrix& v, double sigma2, Rng& rng);

}  // namespace irsce
