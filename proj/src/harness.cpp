#include "irsce/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "irsce/cs_est.hpp"
#include "irsce/mo_est.hpp"
#include "irsce/wmmse.hpp"

namespace irsce {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" +
                      std::string(v) + "'");
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true/false, got '" +
                    std::string(v) + "'");
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (auto item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

double parse_mu(std::string_view key, std::string_view v) {
  if (v == "auto") return -1.0;
  const double mu = parse_double(key, v);
  if (mu < 0.0) throw ConfigError("config: '" + std::string(key) + "' must be >= 0 or auto");
  return mu;
}

void append_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "nan";
    return;
  }
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, ptr);
}

Index integral_value(double x, const char* what) {
  if (x != std::floor(x) || x < 0.0) {
    throw ConfigError(std::string("config: sweep value for ") + what +
                      " must be a non-negative integer");
  }
  return static_cast<Index>(x);
}

double training_sigma2(const ExperimentConfig& cfg, double pnr_db) {
  // Gains are drawn with τ_BI·τ_IU factored out, so σ² carries the same
  // factor: σ²/(τ_BI·τ_IU) = P_tr/10^(PNR/10).
  return cfg.p_tr / std::pow(10.0, pnr_db / 10.0);
}

double downlink_sigma2(double snr_db) { return 1.0 / std::pow(10.0, snr_db / 10.0); }

struct Streams {
  Rng channel;
  Rng pilots;
  Rng noise;
  Rng estimator;
  Rng beamformer;
  explicit Streams(std::uint64_t seed)
      : channel(split_seed(seed, 0)),
        pilots(split_seed(seed, 1)),
        noise(split_seed(seed, 2)),
        estimator(split_seed(seed, 3)),
        beamformer(split_seed(seed, 4)) {}
};

PilotBlock training_block(const ExperimentConfig& cfg, const SweepPoint& point,
                          const ChannelRealization& ch, Index hold, Streams& st) {
  const TrainingPilots tp =
      make_training_pilots(cfg.geometry, point.t, cfg.p_tr, hold, st.pilots);
  return simulate_uplink(ch, tp.s, tp.v, training_sigma2(cfg, point.pnr_db), st.noise);
}

MoEstConfig mo_config(const ExperimentConfig& cfg, const SweepPoint& point,
                      const PilotBlock& block, const MuChoice& mu) {
  MoEstConfig m;
  m.p_hat = point.k_hat;
  m.q_hat = point.k_hat;
  m.eps_inner = cfg.eps1;
  m.eps_outer = cfg.eps2;
  m.max_outer = cfg.mo_max_outer;
  m.max_inner = cfg.mo_max_inner;
  const double unit = block.noise_power * static_cast<double>(block.slots());
  if (mu.tuned) {
    m.mu_g = mu.scale_g * unit;
    m.mu_h = mu.scale_h * unit;
  } else {
    m.mu_g = cfg.mu_g >= 0.0 ? cfg.mu_g : default_mu(block);
    m.mu_h = cfg.mu_h >= 0.0 ? cfg.mu_h : default_mu(block);
  }
  return m;
}

ChannelRealization draw_channel(const ExperimentConfig& cfg, Rng& rng) {
  SamplingOptions opts;
  opts.on_grid = cfg.on_grid;
  opts.normalized_gains = true;
  return synth_channels(cfg.geometry, sample_paths(cfg.geometry, cfg.k_true, rng, opts));
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mo_est: return "mo_est";
    case Algorithm::cs_est: return "cs_est";
    case Algorithm::perfect_csi: return "perfect_csi";
    case Algorithm::random_phase_baseline: return "random_phase_baseline";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "mo_est") return Algorithm::mo_est;
  if (s == "cs_est") return Algorithm::cs_est;
  if (s == "perfect_csi") return Algorithm::perfect_csi;
  if (s == "random_phase_baseline") return Algorithm::random_phase_baseline;
  throw ConfigError("unknown algorithm '" + std::string(s) +
                    "' (expected mo_est, cs_est, perfect_csi, random_phase_baseline)");
}

SweepAxis parse_axis(std::string_view s) {
  if (s == "none" || s.empty()) return SweepAxis::none;
  if (s == "T") return SweepAxis::t;
  if (s == "PNR") return SweepAxis::pnr;
  if (s == "SNR") return SweepAxis::snr;
  if (s == "K_hat") return SweepAxis::k_hat;
  throw ConfigError("unknown sweep axis '" + std::string(s) +
                    "' (expected T, PNR, SNR, K_hat or none)");
}

void ExperimentConfig::validate() const {
  geometry.validate();
  if (algorithm == Algorithm::cs_est) geometry.validate_dictionaries();
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (axis != SweepAxis::none && values.empty()) {
    throw ConfigError("config: sweep_values must be non-empty when sweep_axis is set");
  }
  if (t_tot < 1) throw ConfigError("config: t_tot must be >= 1");
  if (k_true < 1) throw ConfigError("config: k_true must be >= 1");
  if (n_s < 1 || n_s > std::min(geometry.n_bs, geometry.n_ue)) {
    throw ConfigError("config: n_s must lie in [1, min(n_bs, n_ue)]");
  }
  if (!(p_tr > 0.0)) throw ConfigError("config: p_tr must be > 0");
  if (!(eps1 > 0.0) || !(eps2 > 0.0) || !(eps3 > 0.0)) {
    throw ConfigError("config: eps1, eps2, eps3 must be > 0");
  }
  if (mo_max_outer < 1 || mo_max_inner < 1) {
    throw ConfigError("config: mo_max_outer and mo_max_inner must be >= 1");
  }
  if (t1 < 0) throw ConfigError("config: t1 must be >= 0");
  for (double m : mu_grid) {
    if (!(m >= 0.0)) throw ConfigError("config: mu_grid entries must be >= 0");
  }
  const bool estimator = algorithm == Algorithm::mo_est || algorithm == Algorithm::cs_est;
  for (const SweepPoint& p : sweep_points(*this)) {
    if (p.t < 0 || p.t >= t_tot) throw ConfigError("config: need 0 <= T < t_tot");
    if (estimator && p.t < 1) throw ConfigError("config: estimators need T >= 1");
    if (p.k_hat < 1) throw ConfigError("config: k_hat must be >= 1");
    if (algorithm == Algorithm::mo_est &&
        p.k_hat > std::min({geometry.n_bs, geometry.n_ue, geometry.m()})) {
      throw ConfigError("config: k_hat exceeds the channel matrix dimensions");
    }
    if (algorithm == Algorithm::cs_est) {
      if (p.k_hat > std::min(geometry.g_bs, geometry.g_ue)) {
        throw ConfigError("config: k_hat exceeds the dictionary sizes");
      }
      CsEstConfig c;
      c.t1 = t1;
      c.validate(p.t);
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, std::function<void(std::string_view)>> setters;
  auto idx = [](Index& dst) {
    return [&dst](std::string_view v) { dst = parse_int<Index>("this key", v); };
  };
  SystemGeometry& g = cfg.geometry;
  setters["n_bs"] = idx(g.n_bs);
  setters["n_ue"] = idx(g.n_ue);
  setters["m_y"] = idx(g.m_y);
  setters["m_z"] = idx(g.m_z);
  setters["g_bs"] = idx(g.g_bs);
  setters["g_ue"] = idx(g.g_ue);
  setters["g_y"] = idx(g.g_y);
  setters["g_z"] = idx(g.g_z);
  setters["d_bi"] = [&](std::string_view v) { g.d_bi = parse_double("d_bi", v); };
  setters["d_iu"] = [&](std::string_view v) { g.d_iu = parse_double("d_iu", v); };
  setters["algorithm"] = [&](std::string_view v) { cfg.algorithm = parse_algorithm(v); };
  setters["sweep_axis"] = [&](std::string_view v) { cfg.axis = parse_axis(v); };
  setters["sweep_values"] = [&](std::string_view v) {
    cfg.values = parse_list("sweep_values", v);
  };
  setters["trials"] = [&](std::string_view v) { cfg.trials = parse_int<int>("trials", v); };
  setters["master_seed"] = [&](std::string_view v) {
    cfg.master_seed = parse_int<std::uint64_t>("master_seed", v);
  };
  setters["threads"] = [&](std::string_view v) {
    cfg.threads = parse_int<int>("threads", v);
  };
  setters["T"] = idx(cfg.t);
  setters["pnr_db"] = [&](std::string_view v) { cfg.pnr_db = parse_double("pnr_db", v); };
  setters["snr_db"] = [&](std::string_view v) { cfg.snr_db = parse_double("snr_db", v); };
  setters["t_tot"] = idx(cfg.t_tot);
  setters["k_true"] = idx(cfg.k_true);
  setters["k_hat"] = idx(cfg.k_hat);
  setters["n_s"] = idx(cfg.n_s);
  setters["p_tr"] = [&](std::string_view v) { cfg.p_tr = parse_double("p_tr", v); };
  setters["on_grid"] = [&](std::string_view v) { cfg.on_grid = parse_bool("on_grid", v); };
  setters["record_wall_ms"] = [&](std::string_view v) {
    cfg.record_wall_ms = parse_bool("record_wall_ms", v);
  };
  setters["mu_g"] = [&](std::string_view v) {
    cfg.mu_g = parse_mu("mu_g", v);
  };
  setters["mu_h"] = [&](std::string_view v) { cfg.mu_h = parse_mu("mu_h", v); };
  setters["mu_grid"] = [&](std::string_view v) { cfg.mu_grid = parse_list("mu_grid", v); };
  setters["mo_max_outer"] = [&](std::string_view v) {
    cfg.mo_max_outer = parse_int<int>("mo_max_outer", v);
  };
  setters["mo_max_inner"] = [&](std::string_view v) {
    cfg.mo_max_inner = parse_int<int>("mo_max_inner", v);
  };
  setters["eps1"] = [&](std::string_view v) { cfg.eps1 = parse_double("eps1", v); };
  setters["eps2"] = [&](std::string_view v) { cfg.eps2 = parse_double("eps2", v); };
  setters["eps3"] = [&](std::string_view v) { cfg.eps3 = parse_double("eps3", v); };
  setters["t1"] = idx(cfg.t1);

  int line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
    }
    try {
      it->second(value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + " (" + key +
                        "): " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string preset_config(std::string_view name) {
  if (name == "desk-scale") {
    return "# desk-scale system: 16 BS antennas, 8 UE antennas, 4x4 IRS\n"
           "n_bs = 16\nn_ue = 8\nm_y = 4\nm_z = 4\n"
           "g_bs = 32\ng_ue = 16\ng_y = 8\ng_z = 8\n"
           "d_bi = 150\nd_iu = 10\n"
           "algorithm = mo_est\nsweep_axis = T\nsweep_values = 50,100,150\n"
           "trials = 20\nmaster_seed = 1\nthreads = 1\n"
           "pnr_db = 0\nsnr_db = 10\nt_tot = 2000\nk_true = 3\nk_hat = 3\nn_s = 3\n";
  }
  if (name == "paper-scale") {
    return "# paper-scale system: 36 BS antennas, 16 UE antennas, 6x6 IRS\n"
           "n_bs = 36\nn_ue = 16\nm_y = 6\nm_z = 6\n"
           "g_bs = 64\ng_ue = 64\ng_y = 16\ng_z = 16\n"
           "d_bi = 150\nd_iu = 10\n"
           "algorithm = cs_est\nsweep_axis = T\nsweep_values = 50,100,150,200,250\n"
           "trials = 100\nmaster_seed = 1\nthreads = 1\n"
           "pnr_db = 0\nsnr_db = 10\nt_tot = 2000\nk_true = 3\nk_hat = 3\nn_s = 3\n";
  }
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected desk-scale or paper-scale)");
}

double pnr_to_sigma2(double pnr_db, double d_bi, double d_iu, double p_tr) {
  if (!(d_bi > 0.0) || !(d_iu > 0.0)) throw ConfigError("pnr_to_sigma2: distances must be > 0");
  return p_tr * pathloss(d_bi) * pathloss(d_iu) / std::pow(10.0, pnr_db / 10.0);
}

double nmse(const CMatrix& h_c_true, const CMatrix& h_c_hat) {
  if (h_c_true.rows() != h_c_hat.rows() || h_c_true.cols() != h_c_hat.cols()) {
    throw ShapeError("nmse: shapes differ");
  }
  const double den = h_c_true.squaredNorm();
  if (!(den > 0.0)) throw NumericalError("nmse: true channel is zero");
  return (h_c_true - h_c_hat).squaredNorm() / den;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  const SweepPoint base{cfg.t, cfg.pnr_db, cfg.snr_db, cfg.k_hat};
  if (cfg.axis == SweepAxis::none) return {base};
  std::vector<SweepPoint> out;
  for (double x : cfg.values) {
    SweepPoint p = base;
    switch (cfg.axis) {
      case SweepAxis::t: p.t = integral_value(x, "T"); break;
      case SweepAxis::pnr: p.pnr_db = x; break;
      case SweepAxis::snr: p.snr_db = x; break;
      case SweepAxis::k_hat: p.k_hat = integral_value(x, "K_hat"); break;
      case SweepAxis::none: break;
    }
    out.push_back(p);
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_index) {
  return split_seed(master, trial_index);
}

TrialRecord run_trial(const ExperimentConfig& cfg, const SweepPoint& point,
                      std::uint64_t seed, const MuChoice& mu) {
  TrialRecord rec;
  rec.seed = seed;
  rec.algorithm = cfg.algorithm;
  rec.t = point.t;
  rec.pnr_db = point.pnr_db;
  rec.snr_db = point.snr_db;
  const auto t0 = std::chrono::steady_clock::now();
  const SystemGeometry& geom = cfg.geometry;

  try {
    Streams st(seed);
    const ChannelRealization ch = draw_channel(cfg, st.channel);
    const CMatrix h_c = cascaded(ch);

    DownlinkScenario truth;
    truth.h_c = h_c;
    truth.n_bs = geom.n_bs;
    truth.n_ue = geom.n_ue;
    truth.sigma2_d = downlink_sigma2(point.snr_db);
    truth.n_s = cfg.n_s;
    truth.t_used = point.t;
    truth.t_tot = cfg.t_tot;

    WmmseOptions wopt;
    wopt.eps3 = cfg.eps3;
    wopt.inner.epsilon = cfg.eps3;

    switch (cfg.algorithm) {
      case Algorithm::perfect_csi: {
        const BeamformingSolution sol = alt_wmmse(truth, st.beamformer, wopt);
        rec.nmse = 0.0;
        rec.se_bits_s_hz = sol.se;
        rec.outer_iters = sol.iterations;
        break;
      }
      case Algorithm::random_phase_baseline: {
        const CVector v = random_unit_modulus(geom.m(), st.beamformer);
        const BeamformingSolution sol = wmmse_fixed_reflection(truth, v, wopt);
        rec.nmse = 0.0;
        rec.se_bits_s_hz = sol.se;
        rec.outer_iters = sol.iterations;
        break;
      }
      case Algorithm::mo_est:
      case Algorithm::cs_est: {
        CMatrix h_c_hat;
        if (cfg.algorithm == Algorithm::mo_est) {
          const PilotBlock block = training_block(cfg, point, ch, 0, st);
          const Dictionaries dict = build_dictionaries(geom.with_unitary_dictionaries());
          const MoEstResult est =
              mo_est(block, dict, mo_config(cfg, point, block, mu), st.estimator);
          h_c_hat = est.cascaded();
          rec.outer_iters = est.iterations;
        } else {
          CsEstConfig ccfg;
          ccfg.t1 = cfg.t1;
          ccfg.p_hat = point.k_hat;
          ccfg.q_hat = point.k_hat;
          const PilotBlock block =
              training_block(cfg, point, ch, ccfg.resolved_t1(point.t), st);
          const CsEstResult est = cs_est(block, build_dictionaries(geom), ccfg);
          h_c_hat = est.h_c_hat();
          rec.outer_iters = 1;
        }
        rec.nmse = nmse(h_c, h_c_hat);
        DownlinkScenario designed = truth;
        designed.h_c = h_c_hat;
        const BeamformingSolution sol = alt_wmmse(designed, st.beamformer, wopt);
        const CMatrix h_e = effective_channel(h_c, sol.v_d.v, geom.n_bs, geom.n_ue);
        rec.se_bits_s_hz = spectral_efficiency(h_e, sol.f, truth);
        break;
      }
    }
    if (!std::isfinite(rec.nmse) || !std::isfinite(rec.se_bits_s_hz)) {
      throw NumericalError("trial produced a non-finite metric");
    }
  } catch (const NumericalError& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.nmse = std::nan("");
    rec.se_bits_s_hz = std::nan("");
  }
  if (cfg.record_wall_ms) {
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
  }
  return rec;
}

MuChoice tune_point(const ExperimentConfig& cfg, const SweepPoint& point) {
  MuChoice out;
  if (cfg.mu_grid.empty() || cfg.algorithm != Algorithm::mo_est) return out;
  Streams st(split_seed(cfg.master_seed, ~std::uint64_t{0}));
  const ChannelRealization ch = draw_channel(cfg, st.channel);
  const PilotBlock block = training_block(cfg, point, ch, 0, st);
  const Dictionaries dict = build_dictionaries(cfg.geometry.with_unitary_dictionaries());
  const double unit = block.noise_power * static_cast<double>(block.slots());
  std::vector<double> grid;
  for (double m : cfg.mu_grid) grid.push_back(m * unit);
  const MoEstConfig base = mo_config(cfg, point, block, {});
  const auto [mg, mh] = tune_mu(block, dict, base, grid, grid, st.estimator);
  out.tuned = true;
  out.scale_g = unit > 0.0 ? mg / unit : 0.0;
  out.scale_h = unit > 0.0 ? mh / unit : 0.0;
  return out;
}

SweepResult sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::vector<SweepPoint> points = sweep_points(cfg);
  std::vector<MuChoice> mus;
  for (const SweepPoint& p : points) mus.push_back(tune_point(cfg, p));

  const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t jobs = points.size() * n_trials;
  SweepResult out;
  out.rows.resize(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      const std::size_t pi = j / n_trials;
      const std::size_t ti = j % n_trials;
      try {
        out.rows[j] = run_trial(cfg, points[pi], trial_seed(cfg.master_seed, ti), mus[pi]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(jobs);
      }
    }
  };
  const int n_threads = std::max(1, threads > 0 ? threads : cfg.threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  for (const TrialRecord& r : out.rows) out.failed += r.failed ? 1 : 0;
  return out;
}

std::string_view csv_header() {
  return "seed,algorithm,T,pnr_db,snr_db,nmse,se_bits_s_hz,outer_iters,wall_ms";
}

std::string to_csv_row(const TrialRecord& r) {
  std::string s = std::to_string(r.seed);
  s += ',';
  s += to_string(r.algorithm);
  s += ',';
  s += std::to_string(r.t);
  s += ',';
  append_double(s, r.pnr_db);
  s += ',';
  append_double(s, r.snr_db);
  s += ',';
  append_double(s, r.nmse);
  s += ',';
  append_double(s, r.se_bits_s_hz);
  s += ',';
  s += std::to_string(r.outer_iters);
  s += ',';
  append_double(s, r.wall_ms);
  return s;
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& rows) {
  out << csv_header() << '\n';
  for (const TrialRecord& r : rows) out << to_csv_row(r) << '\n';
}

std::vector<TrialRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw ConfigError("csv: missing or unexpected header");
  }
  auto num = [](std::string_view f) {
    if (f == "nan") return std::nan("");
    return parse_double("csv field", f);
  };
  std::vector<TrialRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw ConfigError("csv: expected 9 fields, got " + std::to_string(f.size()));
    TrialRecord r;
    r.seed = parse_int<std::uint64_t>("seed", f[0]);
    r.algorithm = parse_algorithm(f[1]);
    r.t = parse_int<Index>("T", f[2]);
    r.pnr_db = num(f[3]);
    r.snr_db = num(f[4]);
    r.nmse = num(f[5]);
    r.se_bits_s_hz = num(f[6]);
    r.outer_iters = parse_int<int>("outer_iters", f[7]);
    r.wall_ms = num(f[8]);
    r.failed = std::isnan(r.nmse) || std::isnan(r.se_bits_s_hz);
    rows.push_back(r);
  }
  return rows;
}

double median(std::vector<double> x) {
  if (x.empty()) return std::nan("");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

std::vector<PointSummary> summarize(const std::vector<TrialRecord>& rows) {
  std::vector<PointSummary> out;
  std::vector<double> nm;
  std::vector<double> se;
  auto flush = [&] {
    if (out.empty()) return;
    PointSummary& s = out.back();
    s.nmse_median = median(nm);
    s.se_median = median(se);
    auto mean = [](const std::vector<double>& x) {
      if (x.empty()) return std::nan("");
      double acc = 0.0;
      for (double v : x) acc += v;
      return acc / static_cast<double>(x.size());
    };
    s.nmse_mean = mean(nm);
    s.se_mean = mean(se);
    nm.clear();
    se.clear();
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrialRecord& r = rows[i];
    if (i == 0 || r.seed == rows[0].seed) {
      flush();
      PointSummary s;
      s.algorithm = r.algorithm;
      s.t = r.t;
      s.pnr_db = r.pnr_db;
      s.snr_db = r.snr_db;
      out.push_back(s);
    }
    PointSummary& s = out.back();
    ++s.trials;
    if (r.failed) {
      ++s.failed;
      continue;
    }
    nm.push_back(r.nmse);
    se.push_back(r.se_bits_s_hz);
  }
  flush();
  return out;
}

void write_summary(std::ostream& out, const std::vector<PointSummary>& summary) {
  out << "point,algorithm,T,pnr_db,snr_db,trials,failed,nmse_median,nmse_mean,"
         "se_median,se_mean\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const PointSummary& s = summary[i];
    std::string line = std::to_string(i) + ',' + std::string(to_string(s.algorithm)) +
                       ',' + std::to_string(s.t) + ',';
    append_double(line, s.pnr_db);
    line += ',';
    append_double(line, s.snr_db);
    line += ',' + std::to_string(s.trials) + ',' + std::to_string(s.failed) + ',';
    append_double(line, s.nmse_median);
    line += ',';
    append_double(line, s.nmse_mean);
    line += ',';
    append_double(line, s.se_median);
    line += ',';
    append_double(line, s.se_mean);
    out << line << '\n';
  }
}

}  // namespace irsce
