#pragma once

// Riemannian conjugate gradient over the complex fixed-rank manifold and the
// complex circle manifold.
//
// Gradient convention: every "egrad" handed to this module is the Euclidean
// gradient with respect to the real inner product ⟨A, B⟩ = Re tr(AᴴB), i.e.
// twice the Wirtinger gradient ∂f/∂X*. Callers holding ∂f/∂X* multiply by 2.

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "irsce/numerics.hpp"

namespace irsce {

/// A point X = u·diag(s)·vᴴ of exact rank r.
struct FixedRankPoint {
  CMatrix u;      // n × r, orthonormal columns
  RVector s;      // r positive values, non-increasing
  CMatrix v;      // m × r, orthonormal columns
  CMatrix dense;  // u·diag(s)·vᴴ

  Index rows() const { return u.rows(); }
  Index cols() const { return v.rows(); }
  Index rank() const { return s.size(); }

  static FixedRankPoint from_factors(CMatrix u, RVector s, CMatrix v);
  /// Best rank-r approximation of a; throws NumericalError when a has
  /// numerical rank below r (σ_r ≤ 1e−12·σ₁).
  static FixedRankPoint from_matrix(const CMatrix& a, Index r);
};

/// Tangent vector u·M·vᴴ + U_p·vᴴ + u·V_pᴴ at the point whose factors are
/// anchor_u / anchor_v, with U_pᴴu = 0 and V_pᴴv = 0.
struct FixedRankTangent {
  CMatrix m_core;  // r × r
  CMatrix u_p;     // n × r
  CMatrix v_p;     // m × r
  CMatrix anchor_u;
  CMatrix anchor_v;

  CMatrix embed() const;
};

FixedRankTangent project_tangent(const FixedRankPoint& x, const CMatrix& j);
FixedRankTangent transport(const FixedRankTangent& d, const FixedRankPoint& x_new);
FixedRankTangent riemannian_grad(const FixedRankPoint& x, const CMatrix& egrad);

/// Metric on T_X; the three tangent components are mutually orthogonal.
double tangent_inner(const FixedRankTangent& a, const FixedRankTangent& b);
FixedRankTangent combine(double alpha, const FixedRankTangent& a, double beta,
                         const FixedRankTangent& b);

/// Best rank-r approximation of x + step·d, or nullopt when that matrix has
/// numerical rank below r.
std::optional<FixedRankPoint> try_retract(const FixedRankPoint& x,
                                          const FixedRankTangent& d, double step);
/// As try_retract, throwing NumericalError on a degenerate step.
FixedRankPoint retract(const FixedRankPoint& x, const FixedRankTangent& d,
                       double step);

/// Random rank-r point: product of two CN(0, 1/n) factors re-factored by SVD.
FixedRankPoint random_fixed_rank(Index rows, Index cols, Index r, Rng& rng);

/// Unit-modulus vector, the feasible set of a passive reflection vector.
struct CirclePoint {
  CVector v;
};

/// t = egrad − Re(egrad ∘ v*) ∘ v.
CVector circle_project(const CirclePoint& x, const CVector& egrad);
std::optional<CirclePoint> circle_try_retract(const CirclePoint& x,
                                              const CVector& t, double step);
CirclePoint circle_retract(const CirclePoint& x, const CVector& t, double step);

struct CgOptions {
  double epsilon = 1e-3;            // stop when f_{i−1} − f_i ≤ epsilon
  int max_iters = 1000;
  double contraction = 0.5;         // Armijo step shrink factor
  double sufficient_decrease = 1e-4;
  double initial_step = 1.0;
  int max_backtracks = 50;
  // Start each line search from twice the previously accepted step instead
  // of initial_step.
  bool adaptive_step = true;
  // After an accepted step, also try the minimizer of the quadratic model
  // along the search curve and keep whichever is lower.
  bool interpolate = true;

  void validate() const;
};

template <class Point>
struct CgResult {
  Point x;
  std::vector<double> trace;  // f(x0), then f after every accepted step
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

class FixedRankManifold {
 public:
  using Point = FixedRankPoint;
  using Tangent = FixedRankTangent;
  using Ambient = CMatrix;

  Tangent project(const Point& x, const Ambient& egrad) const {
    return project_tangent(x, egrad);
  }
  Tangent transport(const Tangent& t, const Point& x_new) const {
    return irsce::transport(t, x_new);
  }
  std::optional<Point> retract(const Point& x, const Tangent& t, double step) const {
    return try_retract(x, t, step);
  }
  double inner(const Tangent& a, const Tangent& b) const { return tangent_inner(a, b); }
  Tangent combine(double alpha, const Tangent& a, double beta, const Tangent& b) const {
    return irsce::combine(alpha, a, beta, b);
  }
};

class ComplexCircleManifold {
 public:
  using Point = CirclePoint;
  using Tangent = CVector;
  using Ambient = CVector;

  Tangent project(const Point& x, const Ambient& egrad) const {
    return circle_project(x, egrad);
  }
  Tangent transport(const Tangent& t, const Point& x_new) const {
    return circle_project(x_new, t);
  }
  std::optional<Point> retract(const Point& x, const Tangent& t, double step) const {
    return circle_try_retract(x, t, step);
  }
  double inner(const Tangent& a, const Tangent& b) const {
    return a.dot(b).real();
  }
  Tangent combine(double alpha, const Tangent& a, double beta, const Tangent& b) const {
    return alpha * a + beta * b;
  }
};

template <class M>
concept RiemannianManifold =
    requires(const M& m, const typename M::Point& x, const typename M::Tangent& t,
             const typename M::Ambient& g, double a) {
      { m.project(x, g) } -> std::convertible_to<typename M::Tangent>;
      { m.transport(t, x) } -> std::convertible_to<typename M::Tangent>;
      { m.retract(x, t, a) } -> std::convertible_to<std::optional<typename M::Point>>;
      { m.inner(t, t) } -> std::convertible_to<double>;
      { m.combine(a, t, a, t) } -> std::convertible_to<typename M::Tangent>;
    };

/// Riemannian conjugate gradient with Polak-Ribière+ directions and Armijo
/// backtracking. The objective trace is non-increasing by construction.
template <RiemannianManifold M, class Cost, class Egrad>
  requires std::invocable<Cost&, const typename M::Point&> &&
           std::invocable<Egrad&, const typename M::Point&>
CgResult<typename M::Point> cg_minimize(const M& manifold, Cost&& cost,
                                        Egrad&& egrad, typename M::Point x0,
                                        const CgOptions& opts = {}) {
  opts.validate();
  using Tangent = typename M::Tangent;

  CgResult<typename M::Point> out{std::move(x0), {}, 0, false, false};
  double f = cost(out.x);
  if (!std::isfinite(f)) throw NumericalError("cg_minimize: cost not finite at x0");
  out.trace.push_back(f);

  Tangent grad = manifold.project(out.x, egrad(out.x));
  double grad_sq = manifold.inner(grad, grad);
  Tangent dir = manifold.combine(-1.0, grad, 0.0, grad);
  double step0 = opts.initial_step;

  for (int it = 0; it < opts.max_iters; ++it) {
    if (grad_sq <= std::numeric_limits<double>::min()) {
      out.converged = true;
      break;
    }
    double slope = manifold.inner(grad, dir);
    if (!(slope < 0.0)) {
      dir = manifold.combine(-1.0, grad, 0.0, grad);
      slope = -grad_sq;
    }

    double step = step0;
    std::optional<typename M::Point> accepted;
    double f_new = f;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      auto candidate = manifold.retract(out.x, dir, step);
      if (candidate) {
        const double fc = cost(*candidate);
        if (std::isfinite(fc) && fc <= f + opts.sufficient_decrease * step * slope) {
          accepted = std::move(candidate);
          f_new = fc;
          break;
        }
      }
      step *= opts.contraction;
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    // Overshoot check: minimizer of the quadratic through f, slope and f_new.
    if (opts.interpolate) {
      const double curvature = f_new - f - slope * step;
      if (curvature > 0.0) {
        const double alt = -slope * step * step / (2.0 * curvature);
        if (alt < step && alt > 0.0) {
          auto candidate = manifold.retract(out.x, dir, alt);
          if (candidate) {
            const double fc = cost(*candidate);
            if (std::isfinite(fc) && fc < f_new) {
              accepted = std::move(candidate);
              f_new = fc;
              step = alt;
            }
          }
        }
      }
    }

    out.x = std::move(*accepted);
    ++out.iterations;
    const double decrease = f - f_new;
    f = f_new;
    out.trace.push_back(f);
    if (opts.adaptive_step) step0 = 2.0 * step;

    Tangent grad_new = manifold.project(out.x, egrad(out.x));
    const double grad_new_sq = manifold.inner(grad_new, grad_new);
    const Tangent grad_moved = manifold.transport(grad, out.x);
    double eta = (grad_new_sq - manifold.inner(grad_new, grad_moved)) / grad_sq;
    if (!(eta > 0.0)) eta = 0.0;
    dir = manifold.combine(-1.0, grad_new, eta, manifold.transport(dir, out.x));
    grad = std::move(grad_new);
    grad_sq = grad_new_sq;

    if (decrease <= opts.epsilon) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace irsce
