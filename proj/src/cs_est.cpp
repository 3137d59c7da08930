#include "irsce/cs_est.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <string>

namespace irsce {

namespace {

using u64 = std::uint64_t;

u64 as_u64(Index n) { return static_cast<u64>(n); }

void count(OpCounter* ops, u64 n) {
  if (ops != nullptr) ops->add(n);
}

// Implicit sensing operator: per-atom correlation energies against a
// residual, and on-demand atom materialization.
struct Sensing {
  Index atom_len = 0;
  Index cols = 0;
  std::function<RVector(const CMatrix& res, OpCounter* ops)> energies;
  std::function<CVector(Index c)> atom;
  RVector norms2;  // squared atom norms; selection uses normalized correlation
};

OmpResult omp_core(const Sensing& op, const CMatrix& obs, Index k, OpCounter* ops) {
  if (k < 0 || k > op.cols) {
    throw ShapeError("omp: sparsity " + std::to_string(k) + " exceeds " +
                     std::to_string(op.cols) + " atoms");
  }
  if (obs.rows() != op.atom_len) throw ShapeError("omp: observation length mismatch");
  const Index n_obs = obs.cols();

  OmpResult out;
  out.residual = obs;
  out.coeffs = CMatrix::Zero(0, n_obs);
  out.residual_norms.push_back(obs.norm());
  std::vector<char> taken(static_cast<std::size_t>(op.cols), 0);
  CMatrix chosen(op.atom_len, 0);

  for (Index it = 0; it < k; ++it) {
    RVector e = op.energies(out.residual, ops);
    for (Index c = 0; c < op.cols; ++c) {
      e(c) = op.norms2(c) > 0.0 ? e(c) / op.norms2(c) : 0.0;
    }
    Index best = -1;
    for (Index c = 0; c < op.cols; ++c) {
      if (taken[static_cast<std::size_t>(c)] != 0) continue;
      if (best < 0 || e(c) > e(best)) best = c;
    }
    taken[static_cast<std::size_t>(best)] = 1;
    out.support.push_back(best);
    chosen.conservativeResize(Eigen::NoChange, it + 1);
    chosen.col(it) = op.atom(best);
    count(ops, as_u64(op.atom_len));

    if (it + 1 > op.atom_len) {
      throw NumericalError("omp: " + std::to_string(it + 1) + " atoms exceed observation length " +
                           std::to_string(op.atom_len) + " (selected atoms are collinear)");
    }
    Eigen::HouseholderQR<CMatrix> qr(chosen);
    const RVector diag = qr.matrixQR().diagonal().cwiseAbs().head(it + 1);
    if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) {
      throw NumericalError("omp: selected atoms are numerically collinear at step " +
                           std::to_string(it + 1) + " (atom " + std::to_string(best) +
                           ")");
    }
    out.coeffs = qr.solve(obs);
    out.residual = obs - chosen * out.coeffs;
    const u64 len = as_u64(op.atom_len);
    const u64 sel = as_u64(it + 1);
    count(ops, len * sel * sel + 2 * len * sel * as_u64(n_obs));
    out.residual_norms.push_back(out.residual.norm());
  }
  return out;
}

Sensing dense_sensing(const CMatrix& theta) {
  Sensing op;
  op.atom_len = theta.rows();
  op.cols = theta.cols();
  op.energies = [&theta](const CMatrix& res, OpCounter* ops) -> RVector {
    count(ops, as_u64(theta.rows()) * as_u64(theta.cols()) * as_u64(res.cols()));
    return (theta.adjoint() * res).rowwise().squaredNorm();
  };
  op.atom = [&theta](Index c) -> CVector { return theta.col(c); };
  op.norms2 = theta.colwise().squaredNorm().transpose();
  return op;
}

StageSelection pick(const CMatrix& dictionary, const std::vector<Index>& support) {
  StageSelection s;
  s.support = support;
  s.atoms.resize(dictionary.rows(), static_cast<Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) {
    s.atoms.col(static_cast<Index>(i)) = dictionary.col(support[i]);
  }
  return s;
}

void check_block(const PilotBlock& pilots, const Dictionaries& dict) {
  if (pilots.s.cols() != pilots.slots() || pilots.v.cols() != pilots.slots() ||
      pilots.r.rows() != dict.a_bs.rows() || pilots.s.rows() != dict.a_ue.rows() ||
      pilots.v.rows() != dict.a_i.rows()) {
    throw ShapeError("cs_est: pilot block does not match the dictionaries");
  }
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

Index CsEstConfig::resolved_t1(Index slots) const {
  return t1 > 0 ? t1 : (slots + 3) / 4;
}

void CsEstConfig::validate(Index slots) const {
  const Index r1 = resolved_t1(slots);
  if (t1 < 0 || r1 < 1 || r1 > slots) {
    throw ConfigError("CsEstConfig: t1 must satisfy 1 <= t1 <= T (t1 = " +
                      std::to_string(r1) + ", T = " + std::to_string(slots) + ")");
  }
  if (p_hat < 1 || q_hat < 1) throw ConfigError("CsEstConfig: p_hat, q_hat must be >= 1");
  if (max_columns < 1) throw ConfigError("CsEstConfig: max_columns must be >= 1");
}

OmpResult omp_mmv(const CMatrix& theta, const CMatrix& obs, Index k, OpCounter* ops) {
  return omp_core(dense_sensing(theta), obs, k, ops);
}

CMatrix stage1_sensing(const PilotBlock& pilots, const Dictionaries& dict, Index t1) {
  return pilots.s.leftCols(t1).adjoint() * dict.a_ue;
}

StageSelection stage1_ue_aods(const PilotBlock& pilots, const Dictionaries& dict,
                              const CsEstConfig& cfg, OpCounter* ops) {
  check_block(pilots, dict);
  cfg.validate(pilots.slots());
  const Index t1 = cfg.resolved_t1(pilots.slots());
  const CMatrix theta = stage1_sensing(pilots, dict, t1);
  count(ops, as_u64(t1) * as_u64(dict.a_ue.rows()) * as_u64(dict.a_ue.cols()));
  const CMatrix obs = pilots.r.leftCols(t1).adjoint();
  return pick(dict.a_ue, omp_mmv(theta, obs, cfg.q_hat, ops).support);
}

StageSelection stage2_bs_aoas(const PilotBlock& pilots, const Dictionaries& dict,
                              const CsEstConfig& cfg, OpCounter* ops) {
  check_block(pilots, dict);
  cfg.validate(pilots.slots());
  return pick(dict.a_bs, omp_mmv(dict.a_bs, pilots.r, cfg.p_hat, ops).support);
}

CMatrix permutation_l(const Dictionaries& dict, Index j) {
  const Index g_y = dict.a_y.cols();
  const Index g_z = dict.a_z.cols();
  const Index g_i = g_y * g_z;
  if (j < 0 || j >= g_i) throw ShapeError("permutation_l: atom index out of range");
  if (g_y % 2 != 0 || g_z % 2 != 0) {
    throw ConfigError("permutation_l: IRS grid resolutions must be even (got " +
                      std::to_string(g_y) + "x" + std::to_string(g_z) + ")");
  }
  const Index jy = j / g_z;
  const Index jz = j % g_z;
  CMatrix l = CMatrix::Zero(g_i, g_i);
  for (Index ky = 0; ky < g_y; ++ky) {
    for (Index kz = 0; kz < g_z; ++kz) {
      const Index sy = ((ky - jy + g_y / 2) % g_y + g_y) % g_y;
      const Index sz = ((kz - jz + g_z / 2) % g_z + g_z) % g_z;
      l(ky * g_z + kz, sy * g_z + sz) = 1.0;
    }
  }
  const CMatrix at = dict.a_i.transpose();
  const CMatrix lhs = at.array().rowwise() * dict.a_i.col(j).adjoint().array();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dict.a_i.rows()));
  const double err = (lhs - scale * l * at).norm();
  if (!(err < 1e-9)) {
    throw ConfigError("permutation_l: IRS grid is not closed under frequency shifts "
                      "(row matching residual " + std::to_string(err) + ")");
  }
  return l;
}

CMatrix stage3_sensing(const PilotBlock& pilots, const CMatrix& a_ue_bar,
                       const CMatrix& a_bs_bar, const Dictionaries& dict) {
  check_block(pilots, dict);
  const Index n_bs = a_bs_bar.rows();
  const Index slots = pilots.slots();
  const CMatrix cv = pilots.v.transpose() * dict.a_i;             // T × G_I
  const CMatrix cs = pilots.s.transpose() * a_ue_bar.conjugate(); // T × Q
  CMatrix out(n_bs * slots, a_bs_bar.cols() * a_ue_bar.cols() * dict.a_i.cols());
  for (Index t = 0; t < slots; ++t) {
    out.middleRows(t * n_bs, n_bs) =
        kron(kron(cv.row(t), cs.row(t)), a_bs_bar);
  }
  return out;
}

Stage3Result stage3_gains(const PilotBlock& pilots, const CMatrix& a_ue_bar,
                          const CMatrix& a_bs_bar, const Dictionaries& dict,
                          const CsEstConfig& cfg, OpCounter* ops) {
  check_block(pilots, dict);
  cfg.validate(pilots.slots());
  const Index n_bs = a_bs_bar.rows();
  const Index p = a_bs_bar.cols();
  const Index q = a_ue_bar.cols();
  const Index g_i = dict.a_i.cols();
  const Index slots = pilots.slots();
  const Index pq = p * q;
  if (a_ue_bar.rows() != dict.a_ue.rows() || n_bs != dict.a_bs.rows()) {
    throw ShapeError("stage3_gains: selected atoms do not match the dictionaries");
  }
  if (pq * g_i > cfg.max_columns) {
    throw ConfigError("stage3_gains: sensing matrix needs " + std::to_string(pq * g_i) +
                      " columns (P=" + std::to_string(p) + ", Q=" + std::to_string(q) +
                      ", G_I=" + std::to_string(g_i) + "), budget is " +
                      std::to_string(cfg.max_columns));
  }

  const CMatrix cv = pilots.v.transpose() * dict.a_i;  // T × G_I
  const CMatrix cs = pilots.s.transpose() * a_ue_bar.conjugate();  // T × Q
  const CMatrix cv_conj = cv.conjugate();
  count(ops, as_u64(slots) * as_u64(dict.a_i.rows()) * as_u64(g_i));
  count(ops, as_u64(slots) * as_u64(a_ue_bar.rows()) * as_u64(q));

  Sensing op;
  op.atom_len = n_bs * slots;
  op.cols = pq * g_i;
  op.energies = [&](const CMatrix& res, OpCounter* o) -> RVector {
    const CMatrix r_mat = mat(res.col(0), n_bs, slots);
    const CMatrix b = a_bs_bar.adjoint() * r_mat;  // P × T
    CMatrix w(pq, slots);
    for (Index t = 0; t < slots; ++t) {
      for (Index qi = 0; qi < q; ++qi) {
        w.col(t).segment(qi * p, p) = std::conj(cs(t, qi)) * b.col(t);
      }
    }
    const CMatrix corr = w * cv_conj;  // PQ × G_I, column-major == atom order
    count(o, as_u64(n_bs) * as_u64(p) * as_u64(slots) + as_u64(pq) * as_u64(slots) +
                 as_u64(pq) * as_u64(slots) * as_u64(g_i));
    return Eigen::Map<const CVector>(corr.data(), corr.size()).cwiseAbs2();
  };
  op.atom = [&](Index c) -> CVector {
    const Index j = c / pq;
    const Index qi = (c % pq) / p;
    const Index pi = c % p;
    CVector a(n_bs * slots);
    for (Index t = 0; t < slots; ++t) {
      a.segment(t * n_bs, n_bs) = (cv(t, j) * cs(t, qi)) * a_bs_bar.col(pi);
    }
    return a;
  };

  // ‖atom(j, q, p)‖² = Σ_t |cv(t,j)|²·|cs(t,q)|²·‖ā_p‖²
  const Eigen::MatrixXd slot_energy = cv.cwiseAbs2().transpose() * cs.cwiseAbs2();  // G_I × Q
  const RVector bs_norms2 = a_bs_bar.colwise().squaredNorm().transpose();
  op.norms2.resize(op.cols);
  for (Index j = 0; j < g_i; ++j) {
    for (Index qi = 0; qi < q; ++qi) {
      for (Index pi = 0; pi < p; ++pi) {
        op.norms2(j * pq + qi * p + pi) = slot_energy(j, qi) * bs_norms2(pi);
      }
    }
  }
  count(ops, as_u64(slots) * as_u64(g_i) * as_u64(q));

  const OmpResult omp = omp_core(op, vec(pilots.r), pq, ops);
  Stage3Result out;
  out.support = omp.support;
  out.lambda = CVector::Zero(pq * g_i);
  for (std::size_t i = 0; i < omp.support.size(); ++i) {
    out.lambda(omp.support[i]) = omp.coeffs(static_cast<Index>(i), 0);
  }
  const CMatrix lam = mat(out.lambda, pq, g_i);
  out.h_c_hat = kron(a_ue_bar.conjugate(), a_bs_bar) * (lam * dict.a_i.transpose());
  count(ops, as_u64(pq) * as_u64(g_i) * as_u64(dict.a_i.rows()) +
                 as_u64(n_bs) * as_u64(a_ue_bar.rows()) * as_u64(pq) *
                     as_u64(dict.a_i.rows()));
  return out;
}

CsEstResult cs_est(const PilotBlock& pilots, const Dictionaries& dict,
                   const CsEstConfig& cfg) {
  cfg.validate(pilots.slots());
  CsEstResult out;
  OpCounter ops[3];
  auto t0 = std::chrono::steady_clock::now();
  out.ue = stage1_ue_aods(pilots, dict, cfg, &ops[0]);
  out.stage_ms[0] = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  out.bs = stage2_bs_aoas(pilots, dict, cfg, &ops[1]);
  out.stage_ms[1] = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  out.gains = stage3_gains(pilots, out.ue.atoms, out.bs.atoms, dict, cfg, &ops[2]);
  out.stage_ms[2] = ms_since(t0);
  for (int i = 0; i < 3; ++i) out.stage_macs[i] = ops[i].macs;
  return out;
}

}  // namespace irsce
