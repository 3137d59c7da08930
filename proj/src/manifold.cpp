#include "irsce/manifold.hpp"

#include <string>

namespace irsce {

namespace {

constexpr double kRankTol = 1e-12;

void check_ambient(const FixedRankPoint& x, const CMatrix& j, const char* who) {
  if (j.rows() != x.rows() || j.cols() != x.cols()) {
    throw ShapeError(std::string(who) + ": expected " + std::to_string(x.rows()) +
                     "x" + std::to_string(x.cols()) + ", got " +
                     std::to_string(j.rows()) + "x" + std::to_string(j.cols()));
  }
}

// Keeps the leading r triplets of a thin SVD given as factors, or nullopt
// when the r-th singular value is numerically zero.
std::optional<FixedRankPoint> truncate(const CMatrix& left, const CMatrix& core,
                                       const CMatrix& right, Index r) {
  Eigen::JacobiSVD<CMatrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  if (s.size() < r || !(s(0) > 0.0) || !(s(r - 1) > kRankTol * s(0))) {
    return std::nullopt;
  }
  return FixedRankPoint::from_factors(left * svd.matrixU().leftCols(r), s.head(r),
                                      right * svd.matrixV().leftCols(r));
}

}  // namespace

FixedRankPoint FixedRankPoint::from_factors(CMatrix u, RVector s, CMatrix v) {
  if (u.cols() != s.size() || v.cols() != s.size()) {
    throw ShapeError("FixedRankPoint: factor ranks disagree");
  }
  FixedRankPoint x;
  x.dense = u * s.asDiagonal() * v.adjoint();
  x.u = std::move(u);
  x.s = std::move(s);
  x.v = std::move(v);
  return x;
}

FixedRankPoint FixedRankPoint::from_matrix(const CMatrix& a, Index r) {
  if (r < 1) throw ShapeError("FixedRankPoint: rank must be >= 1");
  Svd svd = truncated_svd(a, r);
  if (!(svd.s(0) > 0.0) || !(svd.s(r - 1) > kRankTol * svd.s(0))) {
    throw NumericalError("FixedRankPoint: matrix has numerical rank below " +
                         std::to_string(r));
  }
  return from_factors(std::move(svd.u), std::move(svd.s), std::move(svd.v));
}

CMatrix FixedRankTangent::embed() const {
  return anchor_u * m_core * anchor_v.adjoint() + u_p * anchor_v.adjoint() +
         anchor_u * v_p.adjoint();
}

FixedRankTangent project_tangent(const FixedRankPoint& x, const CMatrix& j) {
  check_ambient(x, j, "project_tangent");
  const CMatrix jv = j * x.v;
  const CMatrix jhu = j.adjoint() * x.u;
  FixedRankTangent t;
  t.m_core = x.u.adjoint() * jv;
  t.u_p = jv - x.u * t.m_core;
  t.v_p = jhu - x.v * t.m_core.adjoint();
  t.anchor_u = x.u;
  t.anchor_v = x.v;
  return t;
}

FixedRankTangent transport(const FixedRankTangent& d, const FixedRankPoint& x_new) {
  // Proj_{x_new}(embed(d)) without forming the dense n × m matrix:
  // embed(d) = [u  U_p]·[[M, I], [I, 0]]·[v  V_p]ᴴ.
  const CMatrix& u0 = d.anchor_u;
  const CMatrix& v0 = d.anchor_v;
  if (u0.rows() != x_new.rows() || v0.rows() != x_new.cols()) {
    throw ShapeError("transport: tangent and target point live in different spaces");
  }
  // J·v_new and Jᴴ·u_new for J = embed(d)
  const CMatrix v0h_vn = v0.adjoint() * x_new.v;
  const CMatrix vph_vn = d.v_p.adjoint() * x_new.v;
  const CMatrix jv = u0 * (d.m_core * v0h_vn + vph_vn) + d.u_p * v0h_vn;
  const CMatrix u0h_un = u0.adjoint() * x_new.u;
  const CMatrix uph_un = d.u_p.adjoint() * x_new.u;
  const CMatrix jhu = v0 * (d.m_core.adjoint() * u0h_un + uph_un) + d.v_p * u0h_un;

  FixedRankTangent t;
  t.m_core = x_new.u.adjoint() * jv;
  t.u_p = jv - x_new.u * t.m_core;
  t.v_p = jhu - x_new.v * t.m_core.adjoint();
  t.anchor_u = x_new.u;
  t.anchor_v = x_new.v;
  return t;
}

FixedRankTangent riemannian_grad(const FixedRankPoint& x, const CMatrix& egrad) {
  return project_tangent(x, egrad);
}

double tangent_inner(const FixedRankTangent& a, const FixedRankTangent& b) {
  return real_inner(a.m_core, b.m_core) + real_inner(a.u_p, b.u_p) +
         real_inner(a.v_p, b.v_p);
}

FixedRankTangent combine(double alpha, const FixedRankTangent& a, double beta,
                         const FixedRankTangent& b) {
  FixedRankTangent t;
  t.m_core = alpha * a.m_core + beta * b.m_core;
  t.u_p = alpha * a.u_p + beta * b.u_p;
  t.v_p = alpha * a.v_p + beta * b.v_p;
  t.anchor_u = a.anchor_u;
  t.anchor_v = a.anchor_v;
  return t;
}

std::optional<FixedRankPoint> try_retract(const FixedRankPoint& x,
                                          const FixedRankTangent& d, double step) {
  if (step < 0.0) throw std::invalid_argument("retract: step must be >= 0");
  const Index r = x.rank();
  if (step == 0.0) return x;

  // x + step·embed(d) = [u U_p]·[[S + step·M, step·I], [step·I, 0]]·[v V_p]ᴴ
  const Index n = x.rows();
  const Index m = x.cols();
  CMatrix left(n, 2 * r);
  left << x.u, d.u_p;
  CMatrix right(m, 2 * r);
  right << x.v, d.v_p;
  CMatrix core = CMatrix::Zero(2 * r, 2 * r);
  core.topLeftCorner(r, r) = x.s.cast<cplx>().asDiagonal();
  core.topLeftCorner(r, r) += step * d.m_core;
  core.topRightCorner(r, r) = step * CMatrix::Identity(r, r);
  core.bottomLeftCorner(r, r) = step * CMatrix::Identity(r, r);

  if (n < 2 * r || m < 2 * r) {
    return truncate(CMatrix::Identity(n, n), left * core * right.adjoint(),
                    CMatrix::Identity(m, m), r);
  }
  Eigen::HouseholderQR<CMatrix> ql(left);
  Eigen::HouseholderQR<CMatrix> qr(right);
  const CMatrix q_left = ql.householderQ() * CMatrix::Identity(n, 2 * r);
  const CMatrix q_right = qr.householderQ() * CMatrix::Identity(m, 2 * r);
  const CMatrix r_left = ql.matrixQR().topRows(2 * r).triangularView<Eigen::Upper>();
  const CMatrix r_right = qr.matrixQR().topRows(2 * r).triangularView<Eigen::Upper>();
  return truncate(q_left, r_left * core * r_right.adjoint(), q_right, r);
}

FixedRankPoint retract(const FixedRankPoint& x, const FixedRankTangent& d,
                       double step) {
  auto out = try_retract(x, d, step);
  if (!out) {
    throw NumericalError("retract: x + step*d has numerical rank below " +
                         std::to_string(x.rank()));
  }
  return std::move(*out);
}

FixedRankPoint random_fixed_rank(Index rows, Index cols, Index r, Rng& rng) {
  if (r < 1 || r > std::min(rows, cols)) {
    throw ShapeError("random_fixed_rank: rank out of range");
  }
  const double var = 1.0 / static_cast<double>(rows);
  const CMatrix a = complex_gaussian(rows, r, var, rng);
  const CMatrix b = complex_gaussian(r, cols, var, rng);
  return FixedRankPoint::from_matrix(a * b, r);
}

CVector circle_project(const CirclePoint& x, const CVector& egrad) {
  if (egrad.size() != x.v.size()) throw ShapeError("circle_project: size mismatch");
  const RVector radial = egrad.cwiseProduct(x.v.conjugate()).real();
  return egrad - radial.cast<cplx>().cwiseProduct(x.v);
}

std::optional<CirclePoint> circle_try_retract(const CirclePoint& x,
                                              const CVector& t, double step) {
  if (t.size() != x.v.size()) throw ShapeError("circle_retract: size mismatch");
  CirclePoint out{x.v + step * t};
  for (Index i = 0; i < out.v.size(); ++i) {
    const double mag = std::abs(out.v(i));
    if (!(mag > 1e-12)) return std::nullopt;
    out.v(i) /= mag;
  }
  return out;
}

CirclePoint circle_retract(const CirclePoint& x, const CVector& t, double step) {
  auto out = circle_try_retract(x, t, step);
  if (!out) throw NumericalError("circle_retract: an entry of v + step*t vanished");
  return std::move(*out);
}

void CgOptions::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("CgOptions: epsilon must be > 0");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw ConfigError("CgOptions: contraction must lie in (0, 1)");
  }
  if (!(sufficient_decrease > 0.0 && sufficient_decrease <= 0.5)) {
    throw ConfigError("CgOptions: sufficient decrease constant must lie in (0, 0.5]");
  }
  if (!(initial_step > 0.0)) throw ConfigError("CgOptions: initial step must be > 0");
  if (max_iters < 0 || max_backtracks < 0) {
    throw ConfigError("CgOptions: iteration budgets must be non-negative");
  }
}

}  // namespace irsce
