#include "irsce/numerics.hpp"

#include <cmath>
#include <numbers>

namespace irsce {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("khatri_rao: column counts differ (" +
                     std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()) + ")");
  }
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
    }
  }
  return out;
}

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix mat(const CVector& x, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || x.size() != rows * cols) {
    throw ShapeError("mat: length " + std::to_string(x.size()) +
                     " cannot be reshaped to " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return Eigen::Map<const CMatrix>(x.data(), rows, cols);
}

CMatrix commutation_matrix(Index m, Index n) {
  if (m < 1 || n < 1) throw ShapeError("commutation_matrix: m, n must be >= 1");
  CMatrix k = CMatrix::Zero(m * n, m * n);
  // vec(A)[i + j·m] = A(i,j) = vec(Aᵀ)[j + i·n]
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) k(j + i * n, i + j * m) = 1.0;
  }
  return k;
}

Svd truncated_svd(const CMatrix& a, Index r) {
  if (r < 0 || r > std::min(a.rows(), a.cols())) {
    throw ShapeError("truncated_svd: rank " + std::to_string(r) +
                     " exceeds min dimension of " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()));
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(r), svd.singularValues().head(r),
          svd.matrixV().leftCols(r)};
}

Index numerical_rank(const CMatrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  const RVector s = Eigen::JacobiSVD<CMatrix>(a).singularValues();
  if (s(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

double real_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

CVector random_unit_modulus(Index n, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = std::polar(1.0, phase(rng));
  return v;
}

CMatrix complex_gaussian(Index rows, Index cols, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx(re, im);
    }
  }
  return out;
}

bool all_finite(const CMatrix& a) { return a.allFinite(); }

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace irsce
