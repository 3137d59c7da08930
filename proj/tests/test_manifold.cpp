#include <cmath>

#include "irsce/manifold.hpp"
#include "test_util.hpp"

namespace irsce {
namespace {

using testing::max_abs;

CMatrix proj_dense(const FixedRankPoint& x, const CMatrix& j) {
  const CMatrix pu = x.u * x.u.adjoint();
  const CMatrix pv = x.v * x.v.adjoint();
  const CMatrix iu = CMatrix::Identity(x.rows(), x.rows()) - pu;
  const CMatrix iv = CMatrix::Identity(x.cols(), x.cols()) - pv;
  return pu * j * pv + iu * j * pv + pu * j * iv;
}

CMatrix best_rank(const CMatrix& a, Index r) {
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).adjoint();
}

void expect_valid_point(const FixedRankPoint& x) {
  const Index r = x.rank();
  EXPECT_LT(max_abs(x.u.adjoint() * x.u - CMatrix::Identity(r, r)), 1e-10);
  EXPECT_LT(max_abs(x.v.adjoint() * x.v - CMatrix::Identity(r, r)), 1e-10);
  for (Index i = 0; i < r; ++i) {
    EXPECT_GT(x.s(i), 0.0);
    if (i > 0) EXPECT_GE(x.s(i - 1), x.s(i));
  }
  EXPECT_LT(max_abs(x.dense - x.u * x.s.asDiagonal() * x.v.adjoint()), 1e-10);
}

void expect_tangent_at(const FixedRankTangent& t, const FixedRankPoint& x) {
  EXPECT_LT(max_abs(t.u_p.adjoint() * x.u), 1e-10);
  EXPECT_LT(max_abs(t.v_p.adjoint() * x.v), 1e-10);
}

TEST(FixedRankPoint, RandomPointsAreValid) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) expect_valid_point(random_fixed_rank(9, 6, 3, rng));
  EXPECT_THROW(random_fixed_rank(3, 4, 4, rng), ShapeError);
}

TEST(FixedRankPoint, FromMatrixRejectsLowRank) {
  Rng rng(2);
  const CMatrix a = complex_gaussian(6, 1, 1.0, rng) * complex_gaussian(1, 5, 1.0, rng);
  EXPECT_THROW(FixedRankPoint::from_matrix(a, 2), NumericalError);
}

TEST(ProjectTangent, PointLiesInOwnTangentSpace) {
  Rng rng(3);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  EXPECT_LT(max_abs(project_tangent(x, x.dense).embed() - x.dense), 1e-12);
}

TEST(ProjectTangent, MatchesThreeTermFormulaAndIsIdempotent) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const FixedRankPoint x = random_fixed_rank(8, 6, 3, rng);
    const CMatrix j = complex_gaussian(8, 6, 1.0, rng);
    const FixedRankTangent t = project_tangent(x, j);
    expect_tangent_at(t, x);
    EXPECT_LT(max_abs(t.embed() - proj_dense(x, j)), 1e-10);
    EXPECT_LT(max_abs(project_tangent(x, t.embed()).embed() - t.embed()), 1e-12);
  }
}

TEST(ProjectTangent, SelfAdjoint) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const FixedRankPoint x = random_fixed_rank(7, 9, 2, rng);
    const CMatrix a = complex_gaussian(7, 9, 1.0, rng), b = complex_gaussian(7, 9, 1.0, rng);
    EXPECT_NEAR(real_inner(project_tangent(x, a).embed(), b),
                real_inner(a, project_tangent(x, b).embed()), 1e-10);
  }
}

TEST(ProjectTangent, DoublyOrthogonalDirectionVanishes) {
  Rng rng(6);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  const CMatrix iu = CMatrix::Identity(8, 8) - x.u * x.u.adjoint();
  const CMatrix iv = CMatrix::Identity(6, 6) - x.v * x.v.adjoint();
  const CMatrix j = iu * complex_gaussian(8, 6, 1.0, rng) * iv;
  EXPECT_LT(max_abs(project_tangent(x, j).embed()), 1e-12);
}

TEST(ProjectTangent, RejectsWrongShape) {
  Rng rng(7);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  EXPECT_THROW(project_tangent(x, CMatrix::Zero(6, 8)), ShapeError);
}

TEST(TangentInner, MatchesEmbeddedInnerProduct) {
  Rng rng(8);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  const FixedRankTangent a = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
  const FixedRankTangent b = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
  EXPECT_NEAR(tangent_inner(a, b), real_inner(a.embed(), b.embed()), 1e-12);
  EXPECT_LT(max_abs(combine(2.0, a, -0.5, b).embed() - (2.0 * a.embed() - 0.5 * b.embed())),
            1e-12);
}

TEST(Transport, SameAnchorIsIdentity) {
  Rng rng(9);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  const FixedRankTangent d = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
  EXPECT_LT(max_abs(transport(d, x).embed() - d.embed()), 1e-12);
}

TEST(Transport, ProjectsOntoNewTangentSpaceWithoutGrowing) {
  Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
    const FixedRankPoint y = random_fixed_rank(8, 6, 2, rng);
    const FixedRankTangent d = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
    const FixedRankTangent t = transport(d, y);
    expect_tangent_at(t, y);
    EXPECT_LT(max_abs(t.embed() - project_tangent(y, d.embed()).embed()), 1e-10);
    EXPECT_LE(t.embed().norm(), d.embed().norm() + 1e-12);
  }
}

TEST(RiemannianGrad, ZeroAndTangentInputs) {
  Rng rng(11);
  const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
  EXPECT_EQ(max_abs(riemannian_grad(x, CMatrix::Zero(8, 6)).embed()), 0.0);
  const CMatrix t = project_tangent(x, complex_gaussian(8, 6, 1.0, rng)).embed();
  EXPECT_LT(max_abs(riemannian_grad(x, t).embed() - t), 1e-12);
}

TEST(RiemannianGrad, DirectionalDerivativeAlongRetractionCurve) {
  Rng rng(12);
  const CMatrix a = complex_gaussian(8, 6, 1.0, rng);
  auto cost = [&](const CMatrix& x) {
    return (x - a).squaredNorm() + 0.1 * x.cwiseAbs2().cwiseAbs2().sum();
  };
  auto egrad = [&](const CMatrix& x) -> CMatrix {
    return 2.0 * (x - a) + 0.4 * x.cwiseAbs2().cast<cplx>().cwiseProduct(x);
  };
  for (int i = 0; i < 20; ++i) {
    const FixedRankPoint x = random_fixed_rank(8, 6, 2, rng);
    const FixedRankTangent t = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
    const FixedRankTangent neg = combine(-1.0, t, 0.0, t);
    const double h = 1e-6;
    const double fd = (cost(retract(x, t, h).dense) - cost(retract(x, neg, h).dense)) / (2 * h);
    const double an = tangent_inner(riemannian_grad(x, egrad(x.dense)), t);
    EXPECT_NEAR(fd, an, 1e-4 * std::abs(an));
  }
}

TEST(Retract, ZeroStepIsIdentity) {
  Rng rng(13);
  const FixedRankPoint x = random_fixed_rank(8, 6, 3, rng);
  const FixedRankTangent d = project_tangent(x, complex_gaussian(8, 6, 1.0, rng));
  EXPECT_LT(max_abs(retract(x, d, 0.0).dense - x.dense), 1e-12);
  EXPECT_THROW(retract(x, d, -1.0), std::invalid_argument);
}

TEST(Retract, MatchesFullSvdOracle) {
  Rng rng(14);
  for (auto [n, m, r] : {std::tuple<Index, Index, Index>{8, 6, 2}, {16, 16, 3}, {3, 5, 2},
                         {5, 4, 1}, {4, 4, 3}}) {
    for (int i = 0; i < 10; ++i) {
      const FixedRankPoint x = random_fixed_rank(n, m, r, rng);
      const FixedRankTangent d = project_tangent(x, complex_gaussian(n, m, 1.0, rng));
      for (double step : {1e-3, 0.3, 2.0}) {
        const FixedRankPoint y = retract(x, d, step);
        expect_valid_point(y);
        EXPECT_EQ(y.rank(), r);
        EXPECT_LT(max_abs(y.dense - best_rank(x.dense + step * d.embed(), r)), 1e-10);
      }
    }
  }
}

TEST(Retract, DegenerateStepReported) {
  Rng rng(15);
  const FixedRankPoint x = random_fixed_rank(6, 5, 2, rng);
  // Removing the smallest singular component leaves rank r - 1.
  const CMatrix drop = -x.s(1) * x.u.col(1) * x.v.col(1).adjoint();
  const FixedRankTangent d = project_tangent(x, drop);
  EXPECT_FALSE(try_retract(x, d, 1.0).has_value());
  EXPECT_THROW(retract(x, d, 1.0), NumericalError);
}

TEST(CgMinimize, RecoversExactRankTarget) {
  Rng rng(16);
  const FixedRankManifold mf;
  for (int i = 0; i < 5; ++i) {
    const CMatrix a = random_fixed_rank(10, 8, 2, rng).dense;
    CgOptions opts;
    opts.epsilon = 1e-16;
    opts.max_iters = 3000;
    auto res = cg_minimize(
        mf, [&](const FixedRankPoint& x) { return (x.dense - a).squaredNorm(); },
        [&](const FixedRankPoint& x) -> CMatrix { return 2.0 * (x.dense - a); },
        random_fixed_rank(10, 8, 2, rng), opts);
    EXPECT_LT(res.trace.back(), 1e-8);
  }
}

TEST(CgMinimize, ReachesEckartYoungBound) {
  Rng rng(17);
  const FixedRankManifold mf;
  for (int i = 0; i < 5; ++i) {
    const CMatrix b = complex_gaussian(9, 7, 1.0, rng);
    const RVector s = Eigen::BDCSVD<CMatrix>(b).singularValues();
    const double bound = s.tail(5).squaredNorm();
    CgOptions opts;
    opts.epsilon = 1e-14;
    opts.max_iters = 5000;
    auto res = cg_minimize(
        mf, [&](const FixedRankPoint& x) { return (x.dense - b).squaredNorm(); },
        [&](const FixedRankPoint& x) -> CMatrix { return 2.0 * (x.dense - b); },
        random_fixed_rank(9, 7, 2, rng), opts);
    EXPECT_NEAR(res.trace.back(), bound, 1e-6);
  }
}

TEST(CgMinimize, TracesNonIncreasing) {
  const FixedRankManifold mf;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const CMatrix b = complex_gaussian(8, 6, 1.0, rng);
    auto res = cg_minimize(
        mf,
        [&](const FixedRankPoint& x) {
          return (x.dense - b).squaredNorm() + 0.05 * x.dense.cwiseAbs().sum();
        },
        [&](const FixedRankPoint& x) -> CMatrix {
          CMatrix g = 2.0 * (x.dense - b);
          for (Index k = 0; k < g.size(); ++k) {
            const double mag = std::abs(x.dense(k));
            if (mag > 1e-12) g(k) += 0.05 * x.dense(k) / mag;
          }
          return g;
        },
        random_fixed_rank(8, 6, 2, rng));
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      EXPECT_LE(res.trace[k], res.trace[k - 1] + 1e-12);
    }
  }
}

TEST(CgOptions, ValidationErrors) {
  CgOptions o;
  EXPECT_NO_THROW(o.validate());
  o.epsilon = 0.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = {};
  o.contraction = 1.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = {};
  o.sufficient_decrease = 0.6;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Circle, ProjectionExamples) {
  Rng rng(18);
  const CirclePoint x{random_unit_modulus(6, rng)};
  EXPECT_LT(max_abs(circle_project(x, x.v)), 1e-12);
  const CVector jv = cplx(0.0, 1.0) * x.v;
  EXPECT_LT(max_abs(circle_project(x, jv) - jv), 1e-12);
  const CVector g = complex_gaussian(6, 1, 1.0, rng);
  const CVector t = circle_project(x, g);
  EXPECT_LT(t.cwiseProduct(x.v.conjugate()).real().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(max_abs(circle_project(x, t) - t), 1e-12);
}

TEST(Circle, RetractionProperties) {
  Rng rng(19);
  const CirclePoint x{random_unit_modulus(6, rng)};
  const CVector t = circle_project(x, complex_gaussian(6, 1, 1.0, rng));
  EXPECT_LT(max_abs(circle_retract(x, t, 0.0).v - x.v), 1e-15);
  const CirclePoint y = circle_retract(x, t, 0.7);
  EXPECT_LT((y.v.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
  const double e1 = (circle_retract(x, t, 1e-3).v - (x.v + 1e-3 * t)).norm();
  const double e2 = (circle_retract(x, t, 1e-4).v - (x.v + 1e-4 * t)).norm();
  EXPECT_NEAR(std::log10(e1 / e2), 2.0, 0.1);
}

TEST(Circle, VanishingEntryIsDegenerate) {
  CirclePoint x{CVector::Ones(3)};
  CVector t = CVector::Zero(3);
  t(1) = -1.0;
  EXPECT_FALSE(circle_try_retract(x, t, 1.0).has_value());
  EXPECT_THROW(circle_retract(x, t, 1.0), NumericalError);
}

TEST(Circle, CgFindsNearestUnitModulusVector) {
  Rng rng(20);
  const CVector w = random_unit_modulus(10, rng);
  const ComplexCircleManifold mf;
  CgOptions opts;
  opts.epsilon = 1e-14;
  auto res = cg_minimize(
      mf, [&](const CirclePoint& x) { return (x.v - w).squaredNorm(); },
      [&](const CirclePoint& x) -> CVector { return 2.0 * (x.v - w); },
      CirclePoint{random_unit_modulus(10, rng)}, opts);
  EXPECT_LT(res.trace.back(), 1e-8);
  for (std::size_t k = 1; k < res.trace.size(); ++k) EXPECT_LE(res.trace[k], res.trace[k - 1]);
}

}  // namespace
}  // namespace irsce
