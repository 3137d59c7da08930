#include "irsce/mo_est.hpp"

#include <cmath>
#include <limits>

namespace irsce {

namespace {

constexpr double kKink = 1e-9;

CMatrix phase_of(const CMatrix& z) {
  CMatrix y(z.rows(), z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    for (Index i = 0; i < z.rows(); ++i) {
      const double mag = std::abs(z(i, j));
      y(i, j) = mag < kKink ? cplx(0.0) : z(i, j) / mag;
    }
  }
  return y;
}

double l1(const CMatrix& z) { return z.cwiseAbs().sum(); }

void check_pilots(const PilotBlock& pilots, const Dictionaries& dict) {
  const Index m = dict.a_i.rows();
  if (pilots.slots() < 1) throw ShapeError("mo_est: need at least one slot");
  if (pilots.s.cols() != pilots.slots() || pilots.v.cols() != pilots.slots()) {
    throw ShapeError("mo_est: pilot block slot counts disagree");
  }
  if (pilots.v.rows() != m || pilots.r.rows() != dict.a_bs.rows() ||
      pilots.s.rows() != dict.a_ue.rows()) {
    throw ShapeError("mo_est: pilot block does not match the dictionaries");
  }
}

double residual(const CMatrix& g_hat, const CMatrix& h_hat, const PilotBlock& pilots) {
  return (pilots.r - g_hat * stack_reflected(h_hat, pilots)).squaredNorm();
}

}  // namespace

void MoEstConfig::validate() const {
  if (!(mu_g >= 0.0) || !(mu_h >= 0.0)) {
    throw ConfigError("MoEstConfig: mu_g and mu_h must be non-negative");
  }
  if (!(eps_inner > 0.0) || !(eps_outer > 0.0)) {
    throw ConfigError("MoEstConfig: thresholds must be positive");
  }
  if (p_hat < 1 || q_hat < 1) throw ConfigError("MoEstConfig: ranks must be >= 1");
  if (max_outer < 1 || max_inner < 1) {
    throw ConfigError("MoEstConfig: iteration budgets must be >= 1");
  }
}

CMatrix MoEstResult::cascaded() const { return irsce::cascaded(g_hat.dense, h_hat.dense); }

double default_mu(const PilotBlock& pilots) {
  return 1e-2 * pilots.noise_power * static_cast<double>(pilots.slots());
}

CMatrix stack_reflected(const CMatrix& h_hat, const PilotBlock& pilots) {
  return pilots.v.cwiseProduct(h_hat * pilots.s);
}

double objective_f(const CMatrix& g_hat, const CMatrix& h_hat,
                   const PilotBlock& pilots, const Dictionaries& dict, double mu_g,
                   double mu_h) {
  double f = residual(g_hat, h_hat, pilots);
  if (mu_g != 0.0) f += mu_g * l1(dict.a_bs.adjoint() * g_hat * dict.a_i);
  if (mu_h != 0.0) f += mu_h * l1(dict.a_i.adjoint() * h_hat * dict.a_ue);
  return f;
}

double objective_f(const CMatrix& g_hat, const CMatrix& h_hat,
                   const PilotBlock& pilots, const Dictionaries& dict,
                   const MoEstConfig& cfg) {
  return objective_f(g_hat, h_hat, pilots, dict, cfg.mu_g, cfg.mu_h);
}

CMatrix egrad_g(const CMatrix& x, const CMatrix& r_mat, const CMatrix& f_mat,
                double mu_g, const Dictionaries& dict) {
  if (x.cols() != f_mat.rows() || r_mat.cols() != f_mat.cols() ||
      r_mat.rows() != x.rows()) {
    throw ShapeError("egrad_g: inconsistent shapes");
  }
  const CMatrix fh = f_mat.adjoint();
  CMatrix grad = (x * f_mat - r_mat) * fh;
  if (mu_g != 0.0) {
    const CMatrix y = phase_of(dict.a_bs.adjoint() * x * dict.a_i);
    grad += (0.5 * mu_g) * dict.a_bs * y * dict.a_i.adjoint();
  }
  return grad;
}

CMatrix egrad_h(const CMatrix& h_hat, const CMatrix& g_hat, const PilotBlock& pilots,
                double mu_h, const Dictionaries& dict) {
  if (g_hat.cols() != h_hat.rows() || h_hat.cols() != pilots.s.rows() ||
      g_hat.rows() != pilots.r.rows()) {
    throw ShapeError("egrad_h: inconsistent shapes");
  }
  const CMatrix err = g_hat * stack_reflected(h_hat, pilots) - pilots.r;
  CMatrix grad =
      pilots.v.conjugate().cwiseProduct(g_hat.adjoint() * err) * pilots.s.adjoint();
  if (mu_h != 0.0) {
    const CMatrix y = phase_of(dict.a_i.adjoint() * h_hat * dict.a_ue);
    grad += (0.5 * mu_h) * dict.a_i * y * dict.a_ue.adjoint();
  }
  return grad;
}

MoEstResult mo_est(const PilotBlock& pilots, const Dictionaries& dict,
                   const MoEstConfig& cfg, Rng& rng) {
  cfg.validate();
  check_pilots(pilots, dict);
  const Index n_bs = dict.a_bs.rows();
  const Index n_ue = dict.a_ue.rows();
  const Index m = dict.a_i.rows();
  if (cfg.p_hat > std::min(n_bs, m) || cfg.q_hat > std::min(m, n_ue)) {
    throw ConfigError("MoEstConfig: rank exceeds the channel dimensions");
  }

  MoEstResult out;
  out.h_hat = random_fixed_rank(m, n_ue, cfg.q_hat, rng);
  out.g_hat = random_fixed_rank(n_bs, m, cfg.p_hat, rng);

  CgOptions inner;
  inner.epsilon = cfg.eps_inner;
  inner.max_iters = cfg.max_inner;
  const FixedRankManifold manifold;

  double f_prev = objective_f(out.g_hat.dense, out.h_hat.dense, pilots, dict, cfg);
  out.trace.push_back(f_prev);

  for (int k = 0; k < cfg.max_outer; ++k) {
    {
      const CMatrix f_mat = stack_reflected(out.h_hat.dense, pilots);
      const double h_pen =
          cfg.mu_h * l1(dict.a_i.adjoint() * out.h_hat.dense * dict.a_ue);
      auto cost = [&](const FixedRankPoint& x) {
        double f = (pilots.r - x.dense * f_mat).squaredNorm() + h_pen;
        if (cfg.mu_g != 0.0) f += cfg.mu_g * l1(dict.a_bs.adjoint() * x.dense * dict.a_i);
        return f;
      };
      auto grad = [&](const FixedRankPoint& x) -> CMatrix {
        return 2.0 * egrad_g(x.dense, pilots.r, f_mat, cfg.mu_g, dict);
      };
      auto res = cg_minimize(manifold, cost, grad, out.g_hat, inner);
      out.inner_stalled = out.inner_stalled || res.stalled;
      out.g_hat = std::move(res.x);
    }
    {
      auto cost = [&](const FixedRankPoint& x) {
        return objective_f(out.g_hat.dense, x.dense, pilots, dict, cfg);
      };
      auto grad = [&](const FixedRankPoint& x) -> CMatrix {
        return 2.0 * egrad_h(x.dense, out.g_hat.dense, pilots, cfg.mu_h, dict);
      };
      auto res = cg_minimize(manifold, cost, grad, out.h_hat, inner);
      out.inner_stalled = out.inner_stalled || res.stalled;
      out.h_hat = std::move(res.x);
    }
    ++out.iterations;
    const double f = objective_f(out.g_hat.dense, out.h_hat.dense, pilots, dict, cfg);
    out.trace.push_back(f);
    if (f_prev - f <= cfg.eps_outer) break;
    f_prev = f;
  }
  return out;
}

std::pair<double, double> tune_mu(const PilotBlock& pilots, const Dictionaries& dict,
                                  const MoEstConfig& base,
                                  const std::vector<double>& grid_g,
                                  const std::vector<double>& grid_h, Rng& rng) {
  if (grid_g.empty() || grid_h.empty()) throw ConfigError("tune_mu: empty grid");
  std::vector<Index> fit_slots;
  std::vector<Index> held_slots;
  for (Index t = 0; t < pilots.slots(); ++t) {
    (t % 5 == 4 ? held_slots : fit_slots).push_back(t);
  }
  if (held_slots.empty()) throw ConfigError("tune_mu: need at least five slots");
  const PilotBlock fit = pilots.select(fit_slots);
  const PilotBlock held = pilots.select(held_slots);
  const Rng start = rng;

  std::pair<double, double> best{grid_g.front(), grid_h.front()};
  double best_res = std::numeric_limits<double>::infinity();
  for (double mg : grid_g) {
    for (double mh : grid_h) {
      MoEstConfig cfg = base;
      cfg.mu_g = mg;
      cfg.mu_h = mh;
      Rng local = start;
      const MoEstResult est = mo_est(fit, dict, cfg, local);
      const double res = residual(est.g_hat.dense, est.h_hat.dense, held);
      if (res < best_res) {
        best_res = res;
        best = {mg, mh};
      }
    }
  }
  rng.discard(1);
  return best;
}

}  // namespace irsce
