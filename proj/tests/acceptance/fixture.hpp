#pragma once

// Thresholds and workload sizes for the acceptance run. Values marked
// "calibrated" were fixed from a reference run of this binary (master seeds
// as below) and must not be tuned afterwards to make a run pass.

#include <cstdint>

namespace irsce::acceptance {

// Gradient checks.
inline constexpr int kGradSeeds = 10;
inline constexpr int kGradDirections = 20;
inline constexpr double kGradTolFixedRank = 1e-5;
inline constexpr double kGradTolCircle = 1e-4;
inline constexpr double kFdStep = 1e-6;

// Manifold contracts.
inline constexpr int kManifoldSeeds = 100;
inline constexpr double kProjectionTol = 1e-10;
inline constexpr double kZeroStepTol = 1e-12;

// Channel structure.
inline constexpr int kStructureSeeds = 100;
inline constexpr double kRankRatioTol = 1e-10;

// Identities.
inline constexpr double kIdentityTol = 1e-10;
inline constexpr double kPermutationTol = 1e-9;

// Compressive-sensing exact recovery.
inline constexpr int kCsSeeds = 100;
inline constexpr int kCsRequired = 98;
inline constexpr double kCsNmse = 1e-10;

// Manifold estimator accuracy at PNR 0 dB on the desk geometry.
inline constexpr int kMoSeeds = 20;
inline constexpr std::uint64_t kMoMasterSeed = 2024;
// Calibrated: ceiling on the median NMSE at T = 150. The reference run gave
// 2.60e-2 (6.06e-1 at T = 50); the ceiling allows a factor of about two.
inline constexpr double kMoNmseCeilingT150 = 5e-2;

// Beamforming.
inline constexpr int kWmmseSeeds = 100;
inline constexpr int kWmmseRequired = 95;
inline constexpr double kMonotoneSlack = 1e-9;
inline constexpr double kScalarOracleTol = 1e-8;

// Operation-count scaling.
inline constexpr double kOpRatioLow = 1.6;
inline constexpr double kOpRatioHigh = 2.4;

// Sparsity-level mismatch: largest relative median SE loss at K̂ = K + 1.
// Calibrated: the reference run lost 0.0% (manifold) and 2.2% (compressive
// sensing), so the initial 15% bound was kept.
inline constexpr int kKhatTrials = 30;
inline constexpr std::uint64_t kKhatMasterSeed = 77;
inline constexpr double kKhatMaxLoss = 0.15;

}  // namespace irsce::acceptance
