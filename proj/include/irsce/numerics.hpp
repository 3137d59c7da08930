#pragma once

// Dense complex linear-algebra helpers shared by the estimators and the
// beamformer. Everything here is a pure function of its arguments.

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irsce {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Random stream used everywhere a seed is threaded through.
using Rng = std::mt19937_64;

/// Dimension or size contract violated by the caller.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a valid result (singular system,
/// rank collapse, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kronecker product a ⊗ b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Column-wise Kronecker (Khatri-Rao) product a ⊙ b. Requires equal column
/// counts.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

/// Column-major stacking of a matrix.
CVector vec(const CMatrix& a);

/// Inverse of vec: reshape a vector into rows × cols, column-major.
CMatrix mat(const CVector& x, Index rows, Index cols);

/// (mn)×(mn) permutation K with K·vec(A) == vec(Aᵀ) for every m×n A.
CMatrix commutation_matrix(Index m, Index n);

/// Thin SVD factors, singular values non-increasing.
struct Svd {
  CMatrix u;
  RVector s;
  CMatrix v;
};

/// Best rank-r approximation factors of a, computed from a full
/// decomposition.
Svd truncated_svd(const CMatrix& a, Index r);

/// Number of singular values above rel_tol·σ₁.
Index numerical_rank(const CMatrix& a, double rel_tol = 1e-12);

/// Real inner product ⟨a, b⟩ = Re tr(aᴴb).
double real_inner(const CMatrix& a, const CMatrix& b);

/// n entries e^{jϑ}, ϑ uniform on [0, 2π).
CVector random_unit_modulus(Index n, Rng& rng);

/// rows × cols matrix with i.i.d. CN(0, variance) entries (real and
/// imaginary parts each of variance/2).
CMatrix complex_gaussian(Index rows, Index cols, double variance, Rng& rng);

/// True if every entry is finite.
bool all_finite(const CMatrix& a);

/// Counter-based seed splitter (SplitMix64 finalizer over master + index).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

}  // namespace irsce
