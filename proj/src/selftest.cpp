#include "irsce/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "irsce/cs_est.hpp"
#include "irsce/harness.hpp"
#include "irsce/manifold.hpp"
#include "irsce/mo_est.hpp"
#include "irsce/wmmse.hpp"

namespace irsce {

namespace {

struct Check {
  std::string name;
  std::function<bool()> run;
};

bool projection_idempotent() {
  Rng rng(11);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  const CMatrix j = complex_gaussian(8, 6, 1.0, rng);
  const CMatrix once = project_tangent(x, j).embed();
  const CMatrix twice = project_tangent(x, once).embed();
  return (once - twice).norm() < 1e-10;
}

bool zero_step_retraction() {
  Rng rng(12);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  const FixedRankTangent d = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
  return (retract(x, d, 0.0).dense - x.dense).norm() < 1e-12;
}

bool gradient_matches_differences() {
  Rng rng(13);
  SystemGeometry geom;
  geom.n_bs = 8;
  geom.n_ue = 4;
  geom.m_y = 2;
  geom.m_z = 4;
  geom = geom.with_unitary_dictionaries();
  const Dictionaries dict = build_dictionaries(geom);
  const CMatrix r = complex_gaussian(8, 10, 1.0, rng);
  const CMatrix f = complex_gaussian(8, 10, 1.0, rng);
  const CMatrix x = complex_gaussian(8, 8, 1.0, rng);
  const CMatrix dir = complex_gaussian(8, 8, 1.0, rng);
  const double mu = 0.3;
  auto cost = [&](const CMatrix& a) {
    return (r - a * f).squaredNorm() + mu * (dict.a_bs.adjoint() * a * dict.a_i).cwiseAbs().sum();
  };
  const double h = 1e-6;
  const double fd = (cost(x + h * dir) - cost(x - h * dir)) / (2.0 * h);
  const double an = 2.0 * real_inner(egrad_g(x, r, f, mu, dict), dir);
  return std::abs(fd - an) <= 1e-5 * std::abs(an);
}

bool effective_channel_identity() {
  Rng rng(14);
  const CMatrix g = complex_gaussian(6, 5, 1.0, rng);
  const CMatrix h = complex_gaussian(5, 3, 1.0, rng);
  const CVector v = random_unit_modulus(5, rng);
  const CMatrix direct = h.adjoint() * v.asDiagonal() * g.adjoint();
  return (effective_channel(cascaded(g, h), v, 6, 3) - direct).norm() < 1e-10;
}

bool permutation_identity() {
  SystemGeometry geom;
  const Dictionaries dict = build_dictionaries(geom);
  for (Index j : {Index{0}, Index{5}, dict.a_i.cols() - 1}) {
    const CMatrix l = permutation_l(dict, j);
    if ((l.cwiseAbs().rowwise().sum().array() - 1.0).abs().maxCoeff() > 0.0) return false;
  }
  return true;
}

bool cs_exact_recovery() {
  SystemGeometry geom;
  Rng rng(15);
  SamplingOptions opts;
  opts.on_grid = true;
  opts.normalized_gains = true;
  const ChannelRealization ch = synth_channels(geom, sample_paths(geom, 2, rng, opts));
  CsEstConfig cfg;
  cfg.t1 = 15;
  cfg.p_hat = 2;
  cfg.q_hat = 2;
  const TrainingPilots tp = make_training_pilots(geom, 60, 1.0, cfg.t1, rng);
  const PilotBlock block = simulate_uplink(ch, tp.s, tp.v, 0.0, rng);
  const CsEstResult est = cs_est(block, build_dictionaries(geom), cfg);
  return nmse(cascaded(ch), est.h_c_hat()) < 1e-10;
}

bool wmmse_monotone() {
  SystemGeometry geom;
  Rng rng(16);
  SamplingOptions opts;
  opts.normalized_gains = true;
  const ChannelRealization ch = synth_channels(geom, sample_paths(geom, 3, rng, opts));
  DownlinkScenario scen;
  scen.h_c = cascaded(ch);
  scen.n_bs = geom.n_bs;
  scen.n_ue = geom.n_ue;
  scen.sigma2_d = 0.1;
  const BeamformingSolution sol = alt_wmmse(scen, rng);
  for (std::size_t i = 1; i < sol.g_trace.size(); ++i) {
    if (sol.g_trace[i] > sol.g_trace[i - 1] + 1e-9) return false;
  }
  return std::abs(sol.f.squaredNorm() - 1.0) < 1e-10;
}

bool csv_round_trip() {
  TrialRecord r;
  r.seed = 1234567890123ULL;
  r.algorithm = Algorithm::cs_est;
  r.t = 60;
  r.pnr_db = -2.5;
  r.snr_db = 10.0;
  r.nmse = 0.1 + 1e-17;
  r.se_bits_s_hz = 7.123456789012345;
  r.outer_iters = 3;
  std::stringstream ss;
  write_csv(ss, {r});
  const std::vector<TrialRecord> back = parse_csv(ss);
  return back.size() == 1 && back[0] == r;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<Check> checks = {
      {"tangent projection idempotent", projection_idempotent},
      {"zero-step retraction is the identity", zero_step_retraction},
      {"G-gradient matches central differences", gradient_matches_differences},
      {"effective channel from the cascaded channel", effective_channel_identity},
      {"IRS shift matrices are permutations", permutation_identity},
      {"noiseless on-grid CS-EST recovery", cs_exact_recovery},
      {"ALT-WMMSE objective non-increasing", wmmse_monotone},
      {"CSV round trip", csv_round_trip},
  };
  bool all = true;
  for (const Check& c : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      why = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << c.name << why << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace irsce
