#pragma once

// Monte-Carlo experiment driver: configuration, seeded trials, metrics and
// CSV emission.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "irsce/channel.hpp"

namespace irsce {

enum class Algorithm { mo_est, cs_est, perfect_csi, random_phase_baseline };
enum class SweepAxis { none, t, pnr, snr, k_hat };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
SweepAxis parse_axis(std::string_view s);

struct ExperimentConfig {
  SystemGeometry geometry;
  Algorithm algorithm = Algorithm::mo_est;
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;
  int trials = 10;
  std::uint64_t master_seed = 1;
  int threads = 1;

  Index t = 100;
  double pnr_db = 0.0;
  double snr_db = 10.0;
  Index t_tot = 2000;
  Index k_true = 3;
  Index k_hat = 3;
  Index n_s = 3;
  double p_tr = 1.0;
  bool on_grid = false;
  bool record_wall_ms = false;

  // Estimator settings. Negative μ selects 10⁻²·σ²·T; a non-empty mu_grid
  // (multiples of σ²·T) tunes both weights once per sweep point.
  double mu_g = -1.0;
  double mu_h = -1.0;
  std::vector<double> mu_grid;
  int mo_max_outer = 100;
  int mo_max_inner = 300;
  double eps1 = 1e-3;
  double eps2 = 1e-3;
  double eps3 = 1e-3;
  Index t1 = 0;

  void validate() const;
};

/// Parses flat `key = value` text; '#' starts a comment. Unknown keys,
/// malformed values and invalid combinations raise ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Config text for a named preset ("desk-scale" or "paper-scale").
std::string preset_config(std::string_view name);

/// Physical training noise power P_tr·τ_BI·τ_IU / 10^(PNR/10).
double pnr_to_sigma2(double pnr_db, double d_bi, double d_iu, double p_tr);

/// ‖H_c − Ĥ_c‖²_F / ‖H_c‖²_F.
double nmse(const CMatrix& h_c_true, const CMatrix& h_c_hat);

struct SweepPoint {
  Index t = 0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
  Index k_hat = 0;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

struct TrialRecord {
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::mo_est;
  Index t = 0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
  double nmse = 0.0;
  double se_bits_s_hz = 0.0;
  int outer_iters = 0;
  double wall_ms = 0.0;
  bool failed = false;
  std::string error;

  bool operator==(const TrialRecord&) const = default;
};

/// Regularization weights in use at one sweep point.
struct MuChoice {
  bool tuned = false;
  double scale_g = 0.0;  // multiples of σ²·T
  double scale_h = 0.0;
};

/// One trial. Channel, pilots, noise, estimator and beamformer draw from
/// separate streams derived from `seed`, so different algorithms and sweep
/// points see the same channel for the same seed.
TrialRecord run_trial(const ExperimentConfig& cfg, const SweepPoint& point,
                      std::uint64_t seed, const MuChoice& mu = {});

/// Tunes (μ_G, μ_H) for one sweep point on a dedicated channel draw.
MuChoice tune_point(const ExperimentConfig& cfg, const SweepPoint& point);

struct SweepResult {
  std::vector<TrialRecord> rows;  // point-major, then trial order
  int failed = 0;
};

/// Runs every (point, trial) pair on `threads` workers (cfg.threads if 0).
SweepResult sweep(const ExperimentConfig& cfg, int threads = 0);

/// Seed of trial i under master seed m.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_index);

std::string_view csv_header();
std::string to_csv_row(const TrialRecord& r);
void write_csv(std::ostream& out, const std::vector<TrialRecord>& rows);
std::vector<TrialRecord> parse_csv(std::istream& in);

struct PointSummary {
  Algorithm algorithm = Algorithm::mo_est;
  Index t = 0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
  int trials = 0;
  int failed = 0;
  double nmse_median = 0.0;
  double nmse_mean = 0.0;
  double se_median = 0.0;
  double se_mean = 0.0;
};

/// Groups rows into sweep points (a point starts whenever the first trial
/// seed reappears) and aggregates the finite values.
std::vector<PointSummary> summarize(const std::vector<TrialRecord>& rows);
void write_summary(std::ostream& out, const std::vector<PointSummary>& s);

double median(std::vector<double> x);

}  // namespace irsce
