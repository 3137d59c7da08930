#include "irsce/channel.hpp"

#include <cmath>
#include <numbers>

namespace irsce {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinFreqSeparation = 1e-6;
constexpr int kMaxRedraws = 10000;

// distance between two spatial frequencies on the period-2 circle
double freq_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0);
  return std::min(d, 2.0 - d);
}

bool same_ula(double a, double b) {
  return freq_distance(a, b) < kMinFreqSeparation;
}

bool same_upa(double ay, double az, double by, double bz) {
  return same_ula(ay, by) && same_ula(az, bz);
}

// uniform on (0, 2π]
double draw_angle(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  return 2.0 * kPi - u(rng);
}

cplx draw_gain(double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace

void SystemGeometry::validate() const {
  if (n_bs < 1 || n_ue < 1 || m_y < 1 || m_z < 1 || g_bs < 1 || g_ue < 1 ||
      g_y < 1 || g_z < 1) {
    throw ConfigError("geometry: all antenna and grid counts must be >= 1");
  }
  if (!(d_bi > 0.0) || !(d_iu > 0.0)) {
    throw ConfigError("geometry: distances must be positive");
  }
}

void SystemGeometry::validate_dictionaries() const {
  validate();
  if (g_bs < n_bs || g_ue < n_ue || g_y < m_y || g_z < m_z) {
    throw ConfigError(
        "geometry: dictionary resolutions must be at least the array sizes");
  }
}

SystemGeometry SystemGeometry::with_unitary_dictionaries() const {
  SystemGeometry out = *this;
  out.g_bs = n_bs;
  out.g_ue = n_ue;
  out.g_y = m_y;
  out.g_z = m_z;
  return out;
}

double pathloss(double distance_m) {
  return std::pow(10.0, -6.14 - 2.0 * std::log10(distance_m));
}

bool Dictionaries::unitary() const {
  return a_bs.rows() == a_bs.cols() && a_ue.rows() == a_ue.cols() &&
         a_i.rows() == a_i.cols();
}

CVector steering_ula(double u, Index n) {
  CVector a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index k = 0; k < n; ++k) {
    a(k) = std::polar(scale, kPi * static_cast<double>(k) * u);
  }
  return a;
}

CVector steering_irs_freq(double u_y, double u_z, Index m_y, Index m_z) {
  return kron(steering_ula(u_y, m_y), steering_ula(u_z, m_z));
}

CVector steering_irs(double theta, double phi, Index m_y, Index m_z) {
  return steering_irs_freq(std::sin(theta) * std::sin(phi), std::cos(phi), m_y,
                           m_z);
}

RVector angular_grid(Index g) {
  RVector grid(g);
  for (Index i = 0; i < g; ++i) {
    grid(i) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(g);
  }
  return grid;
}

double snap_to_grid(double u, Index g) {
  const double step = 2.0 / static_cast<double>(g);
  // index on the periodic grid, wrapped into [0, g)
  long long idx = std::llround((u + 1.0) / step);
  idx %= g;
  if (idx < 0) idx += g;
  return -1.0 + step * static_cast<double>(idx);
}

PathSet sample_paths(const SystemGeometry& geom, Index p, Index q, Rng& rng,
                     SamplingOptions opts) {
  geom.validate();
  const Index m = geom.m();
  if (p < 1 || q < 1 || p > std::min(geom.n_bs, m) ||
      q > std::min(geom.n_ue, m)) {
    throw ConfigError("sample_paths: path counts (" + std::to_string(p) + ", " +
                      std::to_string(q) +
                      ") violate P <= min(N_BS, M), Q <= min(N_UE, M)");
  }
  if (opts.on_grid) geom.validate_dictionaries();

  const double tau_bi = opts.normalized_gains ? 1.0 : pathloss(geom.d_bi);
  const double tau_iu = opts.normalized_gains ? 1.0 : pathloss(geom.d_iu);
  const double nlos = std::pow(10.0, -0.5);

  auto snap = [&](double u, Index g) {
    return opts.on_grid ? snap_to_grid(u, g) : u;
  };

  PathSet out;
  for (Index i = 0; i < p; ++i) {
    IrsBsPath path;
    path.gain = draw_gain(i == 0 ? tau_bi : nlos * tau_bi, rng);
    bool distinct = false;
    for (int attempt = 0; attempt < kMaxRedraws && !distinct; ++attempt) {
      path.aoa = draw_angle(rng);
      path.aod_az = draw_angle(rng);
      path.aod_el = draw_angle(rng);
      path.u_bs = snap(std::cos(path.aoa), geom.g_bs);
      path.u_y = snap(std::sin(path.aod_az) * std::sin(path.aod_el), geom.g_y);
      path.u_z = snap(std::cos(path.aod_el), geom.g_z);
      distinct = true;
      for (const auto& other : out.g_paths) {
        if (same_ula(path.u_bs, other.u_bs) ||
            same_upa(path.u_y, path.u_z, other.u_y, other.u_z)) {
          distinct = false;
          break;
        }
      }
    }
    if (!distinct) throw NumericalError("sample_paths: could not draw distinct G angles");
    out.g_paths.push_back(path);
  }
  for (Index i = 0; i < q; ++i) {
    UeIrsPath path;
    path.gain = draw_gain(i == 0 ? tau_iu : nlos * tau_iu, rng);
    bool distinct = false;
    for (int attempt = 0; attempt < kMaxRedraws && !distinct; ++attempt) {
      path.aoa_az = draw_angle(rng);
      path.aoa_el = draw_angle(rng);
      path.aod = draw_angle(rng);
      path.u_y = snap(std::sin(path.aoa_az) * std::sin(path.aoa_el), geom.g_y);
      path.u_z = snap(std::cos(path.aoa_el), geom.g_z);
      path.u_ue = snap(std::cos(path.aod), geom.g_ue);
      distinct = true;
      for (const auto& other : out.h_paths) {
        if (same_ula(path.u_ue, other.u_ue) ||
            same_upa(path.u_y, path.u_z, other.u_y, other.u_z)) {
          distinct = false;
          break;
        }
      }
    }
    if (!distinct) throw NumericalError("sample_paths: could not draw distinct H angles");
    out.h_paths.push_back(path);
  }
  return out;
}

PathSet sample_paths(const SystemGeometry& geom, Index k, Rng& rng,
                     SamplingOptions opts) {
  return sample_paths(geom, k, k, rng, opts);
}

ChannelRealization synth_channels(const SystemGeometry& geom,
                                  const PathSet& paths) {
  geom.validate();
  const Index m = geom.m();
  ChannelRealization ch;
  ch.paths = paths;
  ch.g = CMatrix::Zero(geom.n_bs, m);
  ch.h = CMatrix::Zero(m, geom.n_ue);

  const double g_scale =
      std::sqrt(static_cast<double>(geom.n_bs * m) / static_cast<double>(paths.p()));
  for (const auto& path : paths.g_paths) {
    const CVector a_bs = steering_ula(path.u_bs, geom.n_bs);
    const CVector a_irs = steering_irs_freq(path.u_y, path.u_z, geom.m_y, geom.m_z);
    ch.g += (g_scale * path.gain) * a_bs * a_irs.adjoint();
  }
  const double h_scale =
      std::sqrt(static_cast<double>(geom.n_ue * m) / static_cast<double>(paths.q()));
  for (const auto& path : paths.h_paths) {
    const CVector a_irs = steering_irs_freq(path.u_y, path.u_z, geom.m_y, geom.m_z);
    const CVector a_ue = steering_ula(path.u_ue, geom.n_ue);
    ch.h += (h_scale * path.gain) * a_irs * a_ue.adjoint();
  }
  return ch;
}

Dictionaries build_dictionaries(const SystemGeometry& geom) {
  geom.validate_dictionaries();
  Dictionaries d;
  d.grid_bs = angular_grid(geom.g_bs);
  d.grid_ue = angular_grid(geom.g_ue);
  d.grid_y = angular_grid(geom.g_y);
  d.grid_z = angular_grid(geom.g_z);

  auto build = [](const RVector& grid, Index n) {
    CMatrix a(n, grid.size());
    for (Index i = 0; i < grid.size(); ++i) a.col(i) = steering_ula(grid(i), n);
    return a;
  };
  d.a_bs = build(d.grid_bs, geom.n_bs);
  d.a_ue = build(d.grid_ue, geom.n_ue);
  d.a_y = build(d.grid_y, geom.m_y);
  d.a_z = build(d.grid_z, geom.m_z);
  d.a_i = kron(d.a_y, d.a_z);
  return d;
}

AngularCoefficients angular_coefficients(const ChannelRealization& ch,
                                         const Dictionaries& dict) {
  if (!dict.unitary()) {
    throw ConfigError(
        "angular_coefficients: dictionaries must be unitary (resolution equal "
        "to array size)");
  }
  return {dict.a_bs.adjoint() * ch.g * dict.a_i,
          dict.a_i.adjoint() * ch.h * dict.a_ue};
}

CMatrix cascaded(const CMatrix& g, const CMatrix& h) {
  return khatri_rao(h.transpose(), g);
}

CMatrix cascaded(const ChannelRealization& ch) { return cascaded(ch.g, ch.h); }

CMatrix effective_channel(const CMatrix& h_c, const CVector& v, Index n_bs,
                          Index n_ue) {
  if (h_c.rows() != n_bs * n_ue || h_c.cols() != v.size()) {
    throw ShapeError("effective_channel: H_c is " + std::to_string(h_c.rows()) +
                     "x" + std::to_string(h_c.cols()) + ", expected " +
                     std::to_string(n_bs * n_ue) + "x" + std::to_string(v.size()));
  }
  // H_c*·v stacks the N_BS × N_UE matrix H_eᵀ column-major; the commutation
  // matrix K(N_BS, N_UE) turns it into vec(H_e). Applying K is a reshape plus
  // transpose, which is what we do here.
  const CVector stacked = h_c.conjugate() * v;
  return mat(stacked, n_bs, n_ue).transpose();
}

CMatrix effective_channel(const CMatrix& h_c, const CVector& v,
                          const SystemGeometry& geom) {
  return effective_channel(h_c, v, geom.n_bs, geom.n_ue);
}

PilotBlock PilotBlock::select(const std::vector<Index>& slots) const {
  PilotBlock out;
  out.s.resize(s.rows(), static_cast<Index>(slots.size()));
  out.v.resize(v.rows(), static_cast<Index>(slots.size()));
  out.r.resize(r.rows(), static_cast<Index>(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Index t = slots[i];
    if (t < 0 || t >= r.cols()) throw ShapeError("PilotBlock::select: slot out of range");
    out.s.col(static_cast<Index>(i)) = s.col(t);
    out.v.col(static_cast<Index>(i)) = v.col(t);
    out.r.col(static_cast<Index>(i)) = r.col(t);
  }
  out.noise_power = noise_power;
  out.p_tr = p_tr;
  return out;
}

TrainingPilots make_training_pilots(const SystemGeometry& geom, Index slots,
                                    double p_tr, Index hold_slots, Rng& rng) {
  if (slots < 1) throw ConfigError("make_training_pilots: need at least one slot");
  if (hold_slots > slots) throw ConfigError("make_training_pilots: hold_slots > slots");
  TrainingPilots out;
  out.s.resize(geom.n_ue, slots);
  out.v.resize(geom.m(), slots);
  const double amp = std::sqrt(p_tr / static_cast<double>(geom.n_ue));
  for (Index t = 0; t < slots; ++t) {
    out.s.col(t) = amp * random_unit_modulus(geom.n_ue, rng);
    if (t > 0 && t < hold_slots) {
      out.v.col(t) = out.v.col(0);
    } else {
      out.v.col(t) = random_unit_modulus(geom.m(), rng);
    }
  }
  return out;
}

PilotBlock simulate_uplink(const ChannelRealization& ch, const CMatrix& s,
                           const CMatrix& v, double sigma2, Rng& rng) {
  if (s.rows() != ch.h.cols() || v.rows() != ch.g.cols() || s.cols() != v.cols()) {
    throw ShapeError("simulate_uplink: pilot shapes do not match the channel");
  }
  if (sigma2 < 0.0) throw ConfigError("simulate_uplink: negative noise power");
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(std::abs(v(i)) - 1.0) > 1e-9) {
      throw ConfigError("simulate_uplink: reflection coefficients must be unit modulus");
    }
  }
  const RVector powers = s.colwise().squaredNorm().transpose();
  const double p_tr = powers.size() > 0 ? powers(0) : 0.0;
  for (Index t = 0; t < powers.size(); ++t) {
    if (std::abs(powers(t) - p_tr) > 1e-9 * std::max(1.0, p_tr)) {
      throw ConfigError("simulate_uplink: pilot power differs across slots");
    }
  }

  PilotBlock out;
  out.s = s;
  out.v = v;
  out.noise_power = sigma2;
  out.p_tr = p_tr;
  // column t of V∘(H S) is diag(v_t)·H·s_t
  out.r = ch.g * v.cwiseProduct(ch.h * s);
  if (sigma2 > 0.0) out.r += complex_gaussian(out.r.rows(), out.r.cols(), sigma2, rng);
  return out;
}

}  // namespace irsce
