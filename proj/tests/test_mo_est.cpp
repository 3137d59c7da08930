#include <cmath>

#include "irsce/harness.hpp"
#include "irsce/mo_est.hpp"
#include "test_util.hpp"

namespace irsce {
namespace {

using testing::max_abs;

struct Problem {
  SystemGeometry geom;
  Dictionaries dict;
  ChannelRealization ch;
  PilotBlock pilots;
};

Problem make_problem(std::uint64_t seed, Index t, double sigma2, Index k = 2,
                     bool on_grid = false) {
  Problem p;
  p.geom = testing::small_geometry(8, 4, 2, 4);
  p.dict = build_dictionaries(p.geom);
  Rng rng(seed);
  p.ch = synth_channels(p.geom, sample_paths(p.geom, k, rng, testing::normalized(on_grid)));
  const TrainingPilots tp = make_training_pilots(p.geom, t, 1.0, 0, rng);
  p.pilots = simulate_uplink(p.ch, tp.s, tp.v, sigma2, rng);
  return p;
}

double slotwise_objective(const CMatrix& g, const CMatrix& h, const Problem& p, double mu_g,
                          double mu_h) {
  double f = 0.0;
  for (Index t = 0; t < p.pilots.slots(); ++t) {
    const CVector pred = g * p.pilots.v.col(t).asDiagonal() * h * p.pilots.s.col(t);
    f += (p.pilots.r.col(t) - pred).squaredNorm();
  }
  const CMatrix cg = p.dict.a_bs.adjoint() * g * p.dict.a_i;
  const CMatrix ch = p.dict.a_i.adjoint() * h * p.dict.a_ue;
  for (Index i = 0; i < cg.size(); ++i) f += mu_g * std::abs(cg(i));
  for (Index i = 0; i < ch.size(); ++i) f += mu_h * std::abs(ch(i));
  return f;
}

TEST(MoObjective, MatchesSlotwiseSum) {
  const Problem p = make_problem(1, 12, 0.1);
  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    const CMatrix g = complex_gaussian(8, 8, 1.0, rng), h = complex_gaussian(8, 4, 1.0, rng);
    for (auto [mg, mh] : {std::pair{0.0, 0.0}, {0.3, 0.0}, {0.0, 0.7}, {0.2, 0.5}}) {
      const double want = slotwise_objective(g, h, p, mg, mh);
      EXPECT_NEAR(objective_f(g, h, p.pilots, p.dict, mg, mh), want, 1e-10 * want);
    }
  }
}

TEST(MoObjective, ZeroAtNoiselessTruthWithoutPenalty) {
  const Problem p = make_problem(3, 10, 0.0);
  EXPECT_LT(objective_f(p.ch.g, p.ch.h, p.pilots, p.dict, 0.0, 0.0), 1e-20);
  EXPECT_NEAR(objective_f(CMatrix::Zero(8, 8), CMatrix::Zero(8, 4), p.pilots, p.dict, 1.0, 1.0),
              p.pilots.r.squaredNorm(), 1e-12);
}

TEST(MoGradient, ZeroAtExactFitWithoutPenalty) {
  const Problem p = make_problem(4, 10, 0.0);
  const CMatrix f_mat = stack_reflected(p.ch.h, p.pilots);
  EXPECT_LT(max_abs(egrad_g(p.ch.g, p.pilots.r, f_mat, 0.0, p.dict)), 1e-12);
  EXPECT_LT(max_abs(egrad_h(p.ch.h, p.ch.g, p.pilots, 0.0, p.dict)), 1e-12);
}

TEST(MoGradient, GFiniteDifference) {
  const Problem p = make_problem(5, 12, 0.1);
  Rng rng(6);
  const CMatrix h = complex_gaussian(8, 4, 1.0, rng);
  const CMatrix f_mat = stack_reflected(h, p.pilots);
  for (double mu : {0.0, 0.5}) {
    for (int i = 0; i < 10; ++i) {
      const CMatrix g = complex_gaussian(8, 8, 1.0, rng);
      const CMatrix d = complex_gaussian(8, 8, 1.0, rng);
      auto f = [&](const CMatrix& x) { return objective_f(x, h, p.pilots, p.dict, mu, 0.0); };
      const double h_step = 1e-6;
      const double fd = (f(g + h_step * d) - f(g - h_step * d)) / (2 * h_step);
      const double an = 2.0 * real_inner(egrad_g(g, p.pilots.r, f_mat, mu, p.dict), d);
      EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(MoGradient, HFiniteDifference) {
  const Problem p = make_problem(7, 12, 0.1);
  Rng rng(8);
  const CMatrix g = complex_gaussian(8, 8, 1.0, rng);
  for (double mu : {0.0, 0.5}) {
    for (int i = 0; i < 10; ++i) {
      const CMatrix h = complex_gaussian(8, 4, 1.0, rng);
      const CMatrix d = complex_gaussian(8, 4, 1.0, rng);
      auto f = [&](const CMatrix& x) { return objective_f(g, x, p.pilots, p.dict, 0.0, mu); };
      const double h_step = 1e-6;
      const double fd = (f(h + h_step * d) - f(h - h_step * d)) / (2 * h_step);
      const double an = 2.0 * real_inner(egrad_h(h, g, p.pilots, mu, p.dict), d);
      EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(MoGradient, ShapeErrors) {
  const Problem p = make_problem(9, 6, 0.1);
  EXPECT_THROW(egrad_h(CMatrix::Zero(8, 3), CMatrix::Zero(8, 8), p.pilots, 0.0, p.dict),
               ShapeError);
  EXPECT_THROW(egrad_g(CMatrix::Zero(8, 8), p.pilots.r, CMatrix::Zero(7, 6), 0.0, p.dict),
               ShapeError);
}

TEST(MoEst, TraceMonotoneAndRanksPreserved) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem p = make_problem(seed, 30, 0.05);
    MoEstConfig cfg;
    cfg.p_hat = 2;
    cfg.q_hat = 2;
    cfg.mu_g = cfg.mu_h = default_mu(p.pilots);
    cfg.max_outer = 15;
    Rng rng(seed + 100);
    const MoEstResult res = mo_est(p.pilots, p.dict, cfg, rng);
    ASSERT_EQ(res.trace.size(), static_cast<std::size_t>(res.iterations) + 1);
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      EXPECT_LE(res.trace[k], res.trace[k - 1] * (1 + 1e-12));
    }
    EXPECT_EQ(numerical_rank(res.g_hat.dense), 2);
    EXPECT_EQ(numerical_rank(res.h_hat.dense), 2);
    EXPECT_NEAR(objective_f(res.g_hat.dense, res.h_hat.dense, p.pilots, p.dict, cfg),
                res.trace.back(), 1e-9 * res.trace.back());
  }
}

TEST(MoEst, CascadedInvariantUnderCounterScaling) {
  Rng rng(10);
  const CMatrix g = complex_gaussian(8, 8, 1.0, rng), h = complex_gaussian(8, 4, 1.0, rng);
  const CVector d = complex_gaussian(8, 1, 1.0, rng);
  const CMatrix g2 = g * d.asDiagonal();
  const CMatrix h2 = d.cwiseInverse().asDiagonal() * h;
  EXPECT_LT(max_abs(cascaded(g2, h2) - cascaded(g, h)), 1e-10);
  EXPECT_LT(nmse(cascaded(g, h), cascaded(g2, h2)), 1e-20);
}

TEST(MoEst, NoiselessRecovery) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = make_problem(seed + 20, 60, 0.0);
    MoEstConfig cfg;
    cfg.p_hat = cfg.q_hat = 2;
    cfg.eps_inner = cfg.eps_outer = 1e-14;
    cfg.max_outer = 60;
    cfg.max_inner = 200;
    Rng rng(seed);
    const MoEstResult res = mo_est(p.pilots, p.dict, cfg, rng);
    if (nmse(cascaded(p.ch), res.cascaded()) < 1e-3) ++good;
  }
  EXPECT_GE(good, 4);
}

TEST(MoEst, ConfigValidation) {
  const Problem p = make_problem(11, 10, 0.1);
  Rng rng(1);
  MoEstConfig cfg;
  cfg.mu_g = -1.0;
  EXPECT_THROW(mo_est(p.pilots, p.dict, cfg, rng), ConfigError);
  cfg = {};
  cfg.p_hat = 9;
  EXPECT_THROW(mo_est(p.pilots, p.dict, cfg, rng), ConfigError);
  cfg = {};
  cfg.max_outer = 0;
  EXPECT_THROW(mo_est(p.pilots, p.dict, cfg, rng), ConfigError);
}

TEST(MoEst, DefaultMu) {
  const Problem p = make_problem(12, 40, 0.5);
  EXPECT_DOUBLE_EQ(default_mu(p.pilots), 1e-2 * 0.5 * 40);
}

TEST(TuneMu, SingletonGridAndDeterminism) {
  const Problem p = make_problem(13, 30, 0.1);
  MoEstConfig base;
  base.p_hat = base.q_hat = 2;
  base.max_outer = 5;
  Rng a(7);
  const auto pick = tune_mu(p.pilots, p.dict, base, {0.25}, {0.5}, a);
  EXPECT_DOUBLE_EQ(pick.first, 0.25);
  EXPECT_DOUBLE_EQ(pick.second, 0.5);
  Rng b(9), c(9);
  const std::vector<double> grid{0.0, 0.01, 1.0};
  EXPECT_EQ(tune_mu(p.pilots, p.dict, base, grid, grid, b),
            tune_mu(p.pilots, p.dict, base, grid, grid, c));
}

}  // namespace
}  // namespace irsce
