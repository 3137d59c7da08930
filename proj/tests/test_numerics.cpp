#include <cmath>
#include <set>

#include "irsce/numerics.hpp"
#include "test_util.hpp"

namespace irsce {
namespace {

using testing::max_abs;

CMatrix rand_mat(Index r, Index c, Rng& rng) { return complex_gaussian(r, c, 1.0, rng); }

TEST(Kron, IdentityOfSizeOneReturnsOperand) {
  Rng rng(1);
  const CMatrix b = rand_mat(3, 2, rng);
  EXPECT_EQ(kron(CMatrix::Identity(1, 1), b), b);
}

TEST(Kron, ColumnTimesRowFollowsBlockDefinition) {
  CMatrix a(2, 1);
  a << 1.0, 0.0;
  CMatrix b(1, 2);
  b << 5.0, 7.0;
  CMatrix expect(2, 2);
  expect << 5.0, 7.0, 0.0, 0.0;
  EXPECT_EQ(kron(a, b), expect);
}

TEST(Kron, EntriesMatchIndexFormula) {
  Rng rng(2);
  const CMatrix a = rand_mat(2, 3, rng);
  const CMatrix b = rand_mat(4, 2, rng);
  const CMatrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 8);
  ASSERT_EQ(k.cols(), 6);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index p = 0; p < 4; ++p)
        for (Index q = 0; q < 2; ++q) EXPECT_EQ(k(i * 4 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Kron, MixedProductProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = rand_mat(2, 2, rng), b = rand_mat(2, 2, rng);
    const CMatrix c = rand_mat(2, 2, rng), d = rand_mat(2, 2, rng);
    EXPECT_LT(max_abs(kron(a, c) * kron(b, d) - kron(a * b, c * d)), 1e-12);
  }
}

TEST(KhatriRao, SingleColumnIsKronecker) {
  Rng rng(4);
  const CMatrix u = rand_mat(3, 1, rng), w = rand_mat(2, 1, rng);
  EXPECT_EQ(khatri_rao(u, w), kron(u, w));
}

TEST(KhatriRao, RowMatricesGiveEntrywiseProduct) {
  Rng rng(5);
  const CMatrix a = rand_mat(1, 5, rng), b = rand_mat(1, 5, rng);
  EXPECT_LT(max_abs(khatri_rao(a, b) - CMatrix(a.cwiseProduct(b))), 1e-15);
}

TEST(KhatriRao, ProductIdentity) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = rand_mat(3, 2, rng), b = rand_mat(2, 4, rng);
    const CMatrix c = rand_mat(2, 3, rng), d = rand_mat(3, 4, rng);
    EXPECT_LT(max_abs(khatri_rao(a * b, c * d) - kron(a, c) * khatri_rao(b, d)), 1e-12);
  }
}

TEST(KhatriRao, RejectsColumnMismatch) {
  EXPECT_THROW(khatri_rao(CMatrix::Zero(2, 3), CMatrix::Zero(2, 2)), ShapeError);
}

TEST(Vec, ColumnMajorOrder) {
  CMatrix a(2, 2);
  a << 1.0, 3.0, 2.0, 4.0;
  CVector expect(4);
  expect << 1.0, 2.0, 3.0, 4.0;
  EXPECT_EQ(vec(a), expect);
}

TEST(Vec, MatRoundTripIsExact) {
  Rng rng(7);
  const CMatrix a = rand_mat(3, 4, rng);
  EXPECT_EQ(mat(vec(a), 3, 4), a);
}

TEST(Vec, MatRejectsLengthMismatch) { EXPECT_THROW(mat(CVector::Zero(5), 2, 3), ShapeError); }

TEST(Vec, TripleProductIdentity) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = rand_mat(2, 2, rng), b = rand_mat(2, 2, rng), c = rand_mat(2, 2, rng);
    EXPECT_LT((vec(a * b * c) - kron(c.transpose(), a) * vec(b)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Commutation, RowVectorCaseIsIdentity) {
  for (Index n = 1; n <= 5; ++n) EXPECT_EQ(commutation_matrix(1, n), CMatrix::Identity(n, n));
}

TEST(Commutation, TransposesVec) {
  Rng rng(9);
  for (auto [m, n] : {std::pair<Index, Index>{2, 3}, {3, 2}, {4, 5}, {1, 1}}) {
    const CMatrix a = rand_mat(m, n, rng);
    EXPECT_EQ(commutation_matrix(m, n) * vec(a), vec(a.transpose()));
  }
}

TEST(Commutation, IsPermutationAndInverseOfSwapped) {
  const CMatrix k = commutation_matrix(3, 4);
  EXPECT_EQ(k.real().rowwise().sum(), Eigen::VectorXd::Ones(12));
  EXPECT_EQ(k.real().colwise().sum(), Eigen::RowVectorXd::Ones(12));
  EXPECT_EQ(k.imag().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(k * commutation_matrix(4, 3), CMatrix::Identity(12, 12));
}

TEST(TruncatedSvd, DiagonalInput) {
  CMatrix a = CMatrix::Zero(3, 3);
  a.diagonal() << 3.0, 2.0, 1.0;
  const Svd s = truncated_svd(a, 2);
  EXPECT_NEAR(s.s(0), 3.0, 1e-14);
  EXPECT_NEAR(s.s(1), 2.0, 1e-14);
}

TEST(TruncatedSvd, RankOneOuterProduct) {
  Rng rng(10);
  CVector u = rand_mat(5, 1, rng);
  CVector w = rand_mat(4, 1, rng);
  u.normalize();
  w.normalize();
  const Svd s = truncated_svd(u * w.adjoint(), 1);
  EXPECT_NEAR(s.s(0), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.u.col(0).dot(u)), 1.0, 1e-12);
}

TEST(TruncatedSvd, ResidualMatchesTailEnergy) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = rand_mat(5, 4, rng);
    const RVector all = Eigen::BDCSVD<CMatrix>(a).singularValues();
    for (Index r = 0; r <= 4; ++r) {
      const Svd s = truncated_svd(a, r);
      const double resid = (a - s.u * s.s.asDiagonal() * s.v.adjoint()).squaredNorm();
      const double tail = all.tail(4 - r).squaredNorm();
      EXPECT_NEAR(resid, tail, 1e-10 * std::max(1.0, tail));
      EXPECT_LT(max_abs(s.u.adjoint() * s.u - CMatrix::Identity(r, r)), 1e-12);
      EXPECT_LT(max_abs(s.v.adjoint() * s.v - CMatrix::Identity(r, r)), 1e-12);
      for (Index i = 1; i < r; ++i) EXPECT_GE(s.s(i - 1), s.s(i));
    }
  }
}

TEST(TruncatedSvd, RejectsExcessRank) {
  EXPECT_THROW(truncated_svd(CMatrix::Zero(3, 2), 3), ShapeError);
}

TEST(NumericalRank, ProductOfThinFactors) {
  Rng rng(12);
  const CMatrix a = rand_mat(9, 3, rng) * rand_mat(3, 7, rng);
  EXPECT_EQ(numerical_rank(a), 3);
  EXPECT_EQ(numerical_rank(CMatrix::Zero(4, 4)), 0);
}

TEST(RealInner, MatchesVecDefinition) {
  Rng rng(13);
  const CMatrix a = rand_mat(3, 4, rng), b = rand_mat(3, 4, rng);
  EXPECT_NEAR(real_inner(a, b), vec(a).dot(vec(b)).real(), 1e-12);
  EXPECT_NEAR(real_inner(a, b), real_inner(b, a), 1e-12);
  EXPECT_NEAR(real_inner(a, a), a.squaredNorm(), 1e-12);
}

TEST(UnitModulus, MagnitudesAreOne) {
  Rng rng(14);
  const CVector v = random_unit_modulus(1000, rng);
  EXPECT_LT((v.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(UnitModulus, SameSeedSameVector) {
  Rng a(15), b(15);
  EXPECT_EQ(random_unit_modulus(50, a), random_unit_modulus(50, b));
}

TEST(UnitModulus, EmpiricalMeanNearZero) {
  Rng rng(16);
  const CVector v = random_unit_modulus(100000, rng);
  const cplx mean = v.mean();
  EXPECT_LT(std::abs(mean.real()), 0.02);
  EXPECT_LT(std::abs(mean.imag()), 0.02);
}

TEST(ComplexGaussian, ComponentVariances) {
  Rng rng(17);
  const CMatrix z = complex_gaussian(200000, 1, 2.5, rng);
  const double re = z.real().squaredNorm() / 200000.0;
  const double im = z.imag().squaredNorm() / 200000.0;
  EXPECT_NEAR(re, 1.25, 0.02);
  EXPECT_NEAR(im, 1.25, 0.02);
}

TEST(SplitSeed, DeterministicAndDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(split_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(split_seed(7, 3), split_seed(7, 3));
  EXPECT_NE(split_seed(7, 3), split_seed(8, 3));
}

TEST(AllFinite, DetectsNan) {
  CMatrix a = CMatrix::Ones(2, 2);
  EXPECT_TRUE(all_finite(a));
  a(1, 0) = cplx(std::nan(""), 0.0);
  EXPECT_FALSE(all_finite(a));
}

}  // namespace
}  // namespace irsce
