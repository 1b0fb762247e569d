#pragma once

#include "model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace seemax {

// Lower bound of -log2|x| linearized at y (tight at x = y):
//   -log2|x| >= -log2|y| + tr(y^-1 (y - x)) / ln 2.
inline double taylor_logdet_lower_bound(const cmat& x, const cmat& y) {
  const cmat yinv = inverse_psd(y);
  return -logdet2(y) + (yinv * (y - x)).trace().real() / kLn2;
}

// ---------------------------------------------------------------------------
// Concave minorant of a signed log-det rate model, anchored at a reference
// state: positive terms are kept exact (concave), negative terms replaced by
// their tangent plane at the anchor. Tight at the anchor, a global lower
// bound everywhere, and gradient-matched.

struct SurrogatePos {
  double w;
  SigmaMap map;
};

struct SurrogateNeg {
  double w;
  double const_part;           // w * (-log2|A0| + (n - tr(A0^-1 c0)) / ln 2)
  std::array<cmat, 4> lin;     // tr(lin[v] X_v) accumulates the affine part
  std::array<cmat, 4> grad;    // constant gradient contribution, -w/ln2 * lin
};

struct Surrogate {
  std::vector<SurrogatePos> pos;
  std::vector<SurrogateNeg> neg;

  double eval(const TransmitState& s) const {
    double v = 0.0;
    for (const auto& t : pos) v += t.w * logdet2(t.map.eval(s));
    for (const auto& t : neg) {
      double lin = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (t.lin[static_cast<std::size_t>(k)].size() == 0) continue;
        const cmat* x = state_var(s, k);
        if (!x || x->size() == 0) continue;
        lin += (t.lin[static_cast<std::size_t>(k)] * (*x)).trace().real();
      }
      v += t.const_part - t.w * lin / kLn2;
    }
    return v;
  }

  void add_grad(const TransmitState& s, std::array<cmat, 4>& g) const {
    for (const auto& t : pos) {
      const cmat ainv = inverse_psd(t.map.eval(s));
      t.map.add_adjoint(ainv, t.w / kLn2, g);
    }
    for (const auto& t : neg)
      for (int k = 0; k < 4; ++k) {
        auto& gk = g[static_cast<std::size_t>(k)];
        const auto& tk = t.grad[static_cast<std::size_t>(k)];
        if (gk.size() != 0 && tk.size() != 0) gk.noalias() += tk;
      }
  }
};

inline Surrogate build_surrogate(const RateModel& rm, const TransmitState& anchor,
                                 double weight = 1.0) {
  Surrogate sur;
  for (const auto& term : rm.terms) {
    const double w = weight * std::abs(term.sign);
    if (term.sign > 0.0) {
      sur.pos.push_back(SurrogatePos{w, term.map});
      continue;
    }
    SurrogateNeg neg;
    neg.w = w;
    const cmat a0 = term.map.eval(anchor);
    const cmat a0inv = inverse_psd(a0);
    const double n = static_cast<double>(a0.rows());
    neg.const_part =
        w * (-logdet2(a0) + (n - (a0inv * term.map.c0).trace().real()) / kLn2);
    for (int v = 0; v < 4; ++v) {
      const auto& terms = term.map.vars[static_cast<std::size_t>(v)];
      if (terms.empty()) continue;
      const cmat* x = state_var(anchor, v);
      if (!x || x->size() == 0) continue;
      cmat lin = cmat::Zero(x->rows(), x->cols());
      for (const auto& t : terms) lin.noalias() += t.adjoint_apply(a0inv);
      neg.lin[static_cast<std::size_t>(v)] = lin;
      neg.grad[static_cast<std::size_t>(v)] = -(w / kLn2) * lin;
    }
    sur.neg.push_back(std::move(neg));
  }
  return sur;
}

// Spec-shaped helpers over a single channel realization.
inline double build_clb(const ChannelSet& ch, const TransmitState& state,
                        const TransmitState& anchor, const NodeParams& alice,
                        const NodeParams& bob, Mode mode,
                        EveDecodingMode eve = {}) {
  return build_surrogate(rate_model(ch, alice, bob, mode, eve), anchor).eval(state);
}

inline std::array<cmat, 4> grad_clb(const ChannelSet& ch,
                                    const TransmitState& state,
                                    const TransmitState& anchor,
                                    const NodeParams& alice,
                                    const NodeParams& bob, Mode mode,
                                    EveDecodingMode eve = {}) {
  std::array<cmat, 4> g;
  for (int v = 0; v < 4; ++v) {
    const cmat* x = state_var(state, v);
    if (x && x->size() != 0)
      g[static_cast<std::size_t>(v)] = cmat::Zero(x->rows(), x->cols());
  }
  build_surrogate(rate_model(ch, alice, bob, mode, eve), anchor).add_grad(state, g);
  return g;
}

// ---------------------------------------------------------------------------
// Parametric subproblem: maximize sum of surrogates - lambda * P(x) over the
// per-node trace caps, by projected gradient ascent (Barzilai-Borwein step,
// monotone Armijo backtracking). Projection: eigenvalue clip to the PSD cone,
// then a per-node trace rescale onto the cap.

struct SubObjective {
  std::vector<const Surrogate*> surrogates;
  double lambda = 0.0;
  bool unit_denominator = false;
  const NodeParams* alice = nullptr;
  const NodeParams* bob = nullptr;
  Mode mode = Mode::UniFD;

  double numerator(const TransmitState& s) const {
    double v = 0.0;
    for (const auto* sur : surrogates) v += sur->eval(s);
    return v;
  }
  double denominator(const TransmitState& s) const {
    return unit_denominator ? 1.0 : total_power(s, *alice, *bob, mode);
  }
  double eval(const TransmitState& s) const {
    return numerator(s) - lambda * denominator(s);
  }
};

inline std::vector<int> active_vars(Mode mode) {
  switch (mode) {
    case Mode::UniFD: return {VQa, VWa, VWb};
    case Mode::UniHD: return {VQa, VWa};
    case Mode::BD: return {VQa, VWa, VWb, VQb};
  }
  return {};
}

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 1500;
};

struct SolveResult {
  TransmitState x;
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;
};

namespace detail {

inline void objective_grad(const SubObjective& obj, const TransmitState& s,
                           const std::vector<int>& vars,
                           std::array<cmat, 4>& g) {
  for (int v : vars) {
    const cmat* x = state_var(s, v);
    g[static_cast<std::size_t>(v)] = cmat::Zero(x->rows(), x->cols());
  }
  for (const auto* sur : obj.surrogates) sur->add_grad(s, g);
  if (!obj.unit_denominator && obj.lambda != 0.0) {
    for (int v : vars) {
      const bool node_a = (v == VQa || v == VWa);
      const NodeParams& np = node_a ? *obj.alice : *obj.bob;
      auto& gv = g[static_cast<std::size_t>(v)];
      const double slope = obj.lambda * (1.0 + np.kappa) / np.mu;
      gv -= slope * cmat::Identity(gv.rows(), gv.cols());
    }
  }
  for (int v : vars) {
    auto& gv = g[static_cast<std::size_t>(v)];
    gv = hermitize(gv);
  }
}

// Euclidean projection of one node's matrices onto the PSD cone intersected
// with the shared trace cap: eigenvalues of every matrix in the group are
// shifted by a common water-filling threshold and clipped at zero, so the
// result is the nearest feasible point (a pure radial rescale is not; it
// admits spurious fixed points on an active cap, which both stalls the
// gradient mapping and can park the iteration off the true optimum).
inline void project_group(TransmitState& s, const std::vector<int>& vars,
                          bool node_a, double cap) {
  std::vector<int> group;
  for (int v : vars)
    if ((v == VQa || v == VWa) == node_a) group.push_back(v);
  if (group.empty()) return;
  if (cap <= 0.0) {
    for (int v : group) {
      cmat* x = state_var(s, v);
      x->setZero();
    }
    return;
  }
  struct Block {
    int var;
    cmat u;
    Eigen::VectorXd d;
  };
  std::vector<Block> blocks;
  blocks.reserve(group.size());
  std::vector<double> evs;
  double clipped_sum = 0.0;
  for (int v : group) {
    cmat* x = state_var(s, v);
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(*x));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("project_group: eigendecomposition failed");
    blocks.push_back({v, es.eigenvectors(), es.eigenvalues()});
    for (Eigen::Index i = 0; i < blocks.back().d.size(); ++i) {
      evs.push_back(blocks.back().d[i]);
      clipped_sum += std::max(blocks.back().d[i], 0.0);
    }
  }
  double theta = 0.0;
  if (clipped_sum > cap) {
    std::sort(evs.begin(), evs.end(), std::greater<double>());
    double acc = 0.0;
    for (std::size_t k = 1; k <= evs.size(); ++k) {
      acc += evs[k - 1];
      const double cand = (acc - cap) / static_cast<double>(k);
      if (k == evs.size() || cand >= evs[k]) {
        theta = cand;
        break;
      }
    }
  }
  for (auto& b : blocks) {
    Eigen::VectorXd dd = (b.d.array() - theta).max(0.0);
    *state_var(s, b.var) = b.u * dd.asDiagonal() * b.u.adjoint();
  }
}

inline void project_state(TransmitState& s, const FeasibleSet& feas,
                          const std::vector<int>& vars) {
  project_group(s, vars, true, feas.cap_a);
  project_group(s, vars, false, feas.cap_b);
}

inline TransmitState step_state(const TransmitState& x,
                                const std::array<cmat, 4>& g, double t,
                                const std::vector<int>& vars) {
  TransmitState y = x;
  for (int v : vars)
    *state_var(y, v) += t * g[static_cast<std::size_t>(v)];
  return y;
}

inline double state_ip(const std::array<cmat, 4>& g, const TransmitState& a,
                       const TransmitState& b, const std::vector<int>& vars) {
  double v = 0.0;
  for (int k : vars) {
    const cmat d = *state_var(a, k) - *state_var(b, k);
    v += (g[static_cast<std::size_t>(k)].conjugate().cwiseProduct(d)).sum().real();
  }
  return v;
}

inline double state_dist(const TransmitState& a, const TransmitState& b,
                         const std::vector<int>& vars) {
  double v = 0.0;
  for (int k : vars) {
    v += (*state_var(a, k) - *state_var(b, k)).squaredNorm();
  }
  return std::sqrt(v);
}

inline double grad_ip(const std::array<cmat, 4>& ga, const std::array<cmat, 4>& gb,
                      const std::vector<int>& vars) {
  double v = 0.0;
  for (int k : vars)
    v += (ga[static_cast<std::size_t>(k)]
              .conjugate()
              .cwiseProduct(gb[static_cast<std::size_t>(k)]))
             .sum()
             .real();
  return v;
}

// Orthonormal basis of Hermitian n x n matrices under <P, Q> = Re tr(PQ).
inline std::vector<cmat> herm_basis(int n) {
  std::vector<cmat> basis;
  basis.reserve(static_cast<std::size_t>(n) * n);
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    cmat e = cmat::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      cmat e = cmat::Zero(n, n);
      e(i, j) = s;
      e(j, i) = s;
      basis.push_back(std::move(e));
      cmat f = cmat::Zero(n, n);
      f(i, j) = std::complex<double>(0.0, s);
      f(j, i) = std::complex<double>(0.0, -s);
      basis.push_back(std::move(f));
    }
  return basis;
}

inline cmat apply_var_terms(const SigmaMap& m, int v, const cmat& e) {
  cmat acc = cmat::Zero(m.rows, m.rows);
  for (const auto& t : m.vars[static_cast<std::size_t>(v)]) t.accumulate(e, acc);
  return acc;
}

// Quadratic model of the smooth objective, restricted to the face of the
// feasible set the iterate sits on. Per variable the model keeps only the
// subspace spanned by its positive eigenvectors (congruence basis U E U^H)
// plus any null direction whose gradient block beats the power-cap multiplier,
// so Newton steps never waste their length pushing into the PSD cone walls.
// Only the kept log-det terms curve (linearized terms and the power slope are
// affine), so the Hessian is assembled exactly from them.
struct QuadModel {
  std::array<int, 4> off{-1, -1, -1, -1};
  std::array<int, 4> dim{0, 0, 0, 0};
  std::array<int, 4> nfull{0, 0, 0, 0};
  std::array<std::vector<cmat>, 4> basis;
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  int total = 0;
  std::array<bool, 2> cap_active{false, false};
  Eigen::MatrixXd u;
  Eigen::VectorXd lam;
  Eigen::VectorXd gc;
};

inline const std::vector<cmat>& herm_basis_cached(int n) {
  static thread_local std::array<std::vector<cmat>, 17> cache;
  auto& slot = cache[static_cast<std::size_t>(n)];
  if (static_cast<int>(slot.size()) != n * n) slot = herm_basis(n);
  return slot;
}

inline bool build_quad_model(const SubObjective& obj, const TransmitState& x,
                             const std::vector<int>& vars,
                             const std::array<cmat, 4>& gx,
                             const FeasibleSet& feas, QuadModel& qm) {
  std::array<cmat, 4> uplus;
  std::array<cmat, 4> unull;
  std::array<Eigen::VectorXd, 4> face_eig;
  std::array<int, 4> face_cols{0, 0, 0, 0};
  std::array<bool, 4> present{false, false, false, false};
  for (int v : vars) {
    const cmat* xv = state_var(x, v);
    if (!xv || xv->size() == 0) continue;
    const std::size_t vi = static_cast<std::size_t>(v);
    const int n = static_cast<int>(xv->rows());
    if (n > 16) return false;
    Eigen::SelfAdjointEigenSolver<cmat> es(*xv);
    if (es.info() != Eigen::Success) return false;
    const double eps = 1e-10 * (1.0 + std::abs(std::real(xv->trace())));
    int r = 0;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()[i] > eps) ++r;
    uplus[vi].resize(n, r);
    unull[vi].resize(n, n - r);
    face_eig[vi].resize(r);
    int ip = 0, in = 0;
    for (int i = 0; i < n; ++i) {
      if (es.eigenvalues()[i] > eps) {
        face_eig[vi][ip] = es.eigenvalues()[i];
        uplus[vi].col(ip++) = es.eigenvectors().col(i);
      } else {
        unull[vi].col(in++) = es.eigenvectors().col(i);
      }
    }
    face_cols[vi] = r;
    present[vi] = true;
  }

  // Cap activity and its multiplier are judged on the face subspace; the wall
  // components of the gradient would otherwise drown the signal.
  std::array<double, 2> nu{0.0, 0.0};
  qm.cap_active = {false, false};
  for (int node = 0; node < 2; ++node) {
    const double cap = node == 0 ? feas.cap_a : feas.cap_b;
    if (cap <= 0.0) continue;
    double used = 0.0;
    double slope = 0.0;
    int rdims = 0;
    bool any = false;
    for (int v : vars) {
      const std::size_t vi = static_cast<std::size_t>(v);
      const bool is_a = (v == VQa || v == VWa);
      if (!present[vi] || (is_a ? 0 : 1) != node) continue;
      used += std::real(state_var(x, v)->trace());
      slope += (uplus[vi].adjoint() * gx[vi] * uplus[vi]).trace().real();
      rdims += static_cast<int>(uplus[vi].cols());
      any = true;
    }
    if (any && used >= cap * (1.0 - 1e-9) && slope > 0.0) {
      qm.cap_active[static_cast<std::size_t>(node)] = true;
      nu[static_cast<std::size_t>(node)] = rdims > 0 ? slope / rdims : 0.0;
    }
  }

  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (!present[vi] || unull[vi].cols() == 0) continue;
    const bool is_a = (v == VQa || v == VWa);
    const double node_nu = nu[is_a ? 0 : 1];
    const cmat b = hermitize(unull[vi].adjoint() * gx[vi] * unull[vi]);
    Eigen::SelfAdjointEigenSolver<cmat> es(b);
    if (es.info() != Eigen::Success) continue;
    std::vector<Eigen::Index> grow;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()[i] > node_nu + 1e-8 * (1.0 + std::abs(node_nu)))
        grow.push_back(i);
      else
        keep.push_back(i);
    }
    if (grow.empty()) continue;
    cmat ext(uplus[vi].rows(), uplus[vi].cols() + grow.size());
    ext.leftCols(uplus[vi].cols()) = uplus[vi];
    for (std::size_t j = 0; j < grow.size(); ++j)
      ext.col(uplus[vi].cols() + static_cast<Eigen::Index>(j)) =
          unull[vi] * es.eigenvectors().col(grow[j]);
    uplus[vi] = std::move(ext);
    cmat rem(unull[vi].rows(), keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
      rem.col(static_cast<Eigen::Index>(j)) =
          unull[vi] * es.eigenvectors().col(keep[j]);
    unull[vi] = std::move(rem);
  }

  qm.total = 0;
  qm.off = {-1, -1, -1, -1};
  qm.dim = {0, 0, 0, 0};
  qm.nfull = {0, 0, 0, 0};
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (!present[vi]) continue;
    qm.nfull[vi] = static_cast<int>(uplus[vi].rows());
    const int r = static_cast<int>(uplus[vi].cols());
    if (r == 0) continue;
    const int nn = static_cast<int>(unull[vi].cols());
    qm.off[vi] = qm.total;
    qm.dim[vi] = r;
    qm.total += r * r + 2 * face_cols[vi] * nn;
  }
  if (qm.total == 0 || qm.total > 512) return false;

  // Basis layout per variable: the r^2 face elements first (their leading r
  // entries are the trace-carrying diagonal ones), then cross elements that
  // rotate genuine face columns toward the remaining null space. Cross steps
  // leave the cone only to second order, which the projection cleans up.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    qm.basis[vi].clear();
    if (qm.off[vi] < 0) continue;
    const auto& reduced = herm_basis_cached(qm.dim[vi]);
    const int nn = static_cast<int>(unull[vi].cols());
    qm.basis[vi].reserve(reduced.size() +
                         2 * static_cast<std::size_t>(face_cols[vi]) * nn);
    for (const cmat& e : reduced)
      qm.basis[vi].push_back(
          hermitize(uplus[vi] * e * uplus[vi].adjoint()));
    for (int i = 0; i < face_cols[vi]; ++i)
      for (int j = 0; j < nn; ++j) {
        const cmat outer = uplus[vi].col(i) * unull[vi].col(j).adjoint();
        qm.basis[vi].push_back(
            hermitize(inv_sqrt2 * (outer + outer.adjoint())));
        qm.basis[vi].push_back(hermitize(
            std::complex<double>(0.0, inv_sqrt2) * (outer - outer.adjoint())));
      }
  }

  qm.h = Eigen::MatrixXd::Zero(qm.total, qm.total);
  std::vector<std::pair<int, cmat>> us;
  for (const Surrogate* s : obj.surrogates) {
    for (const auto& t : s->pos) {
      const cmat a = t.map.eval(x);
      const cmat ainv = inverse_psd(a);
      us.clear();
      for (int v : vars) {
        const std::size_t vi = static_cast<std::size_t>(v);
        if (qm.off[vi] < 0 || t.map.vars[vi].empty()) continue;
        for (std::size_t k = 0; k < qm.basis[vi].size(); ++k)
          us.emplace_back(
              qm.off[vi] + static_cast<int>(k),
              cmat(ainv * apply_var_terms(t.map, v, qm.basis[vi][k])));
      }
      const double c = t.w / kLn2;
      for (std::size_t i = 0; i < us.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double val =
              -c * (us[i].second.transpose().cwiseProduct(us[j].second))
                       .sum()
                       .real();
          qm.h(us[i].first, us[j].first) += val;
          if (i != j) qm.h(us[j].first, us[i].first) += val;
        }
      }
    }
  }

  // Cone curvature correction: rotating face column u_i (eigenvalue lam_i)
  // toward null column n_j while staying on the PSD manifold changes the
  // objective at second order by (g_jj - g_ii)/lam_i per unit squared cross
  // displacement. The flat model would otherwise charge nothing for rotations
  // that slam into the cone wall.
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (qm.off[vi] < 0) continue;
    const int r = qm.dim[vi];
    const int nn = static_cast<int>(unull[vi].cols());
    if (nn == 0) continue;
    for (int i = 0; i < face_cols[vi]; ++i) {
      const double gii =
          (uplus[vi].col(i).adjoint() * gx[vi] * uplus[vi].col(i))
              .value()
              .real();
      for (int j = 0; j < nn; ++j) {
        const double gjj =
            (unull[vi].col(j).adjoint() * gx[vi] * unull[vi].col(j))
                .value()
                .real();
        const double corr = (gjj - gii) / face_eig[vi][i];
        const int base = qm.off[vi] + r * r + 2 * (i * nn + j);
        qm.h(base, base) += corr;
        qm.h(base + 1, base + 1) += corr;
      }
    }
  }

  qm.g.resize(qm.total);
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (qm.off[vi] < 0) continue;
    for (std::size_t k = 0; k < qm.basis[vi].size(); ++k)
      qm.g[qm.off[vi] + static_cast<int>(k)] =
          (gx[vi].transpose().cwiseProduct(qm.basis[vi][k])).sum().real();
  }
  return qm.g.allFinite() && qm.h.allFinite();
}

// Projects the curvature onto the tangent space of the active power caps
// (the model would otherwise extrapolate the log growth along trace-increasing
// directions without bound) and eigen-factorizes it, so trust-region steps of
// any radius afterwards cost O(total). PSD faces and inactive caps are left to
// the projection and the acceptance test.
inline bool factorize_quad_model(QuadModel& qm, const std::vector<int>& vars) {
  Eigen::MatrixXd m = -qm.h;
  Eigen::VectorXd gp = qm.g;
  for (int node = 0; node < 2; ++node) {
    if (!qm.cap_active[static_cast<std::size_t>(node)]) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(qm.total);
    bool any = false;
    for (int v : vars) {
      const std::size_t vi = static_cast<std::size_t>(v);
      const bool is_a = (v == VQa || v == VWa);
      if (qm.off[vi] < 0 || (is_a ? 0 : 1) != node) continue;
      for (int k = 0; k < qm.dim[vi]; ++k) a[qm.off[vi] + k] = 1.0;
      any = true;
    }
    if (!any) continue;
    a /= a.norm();
    gp -= a.dot(gp) * a;
    m -= a * (a.transpose() * m).eval();
    m -= (m * a).eval() * a.transpose();
  }
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) return false;
  qm.lam = es.eigenvalues().cwiseMax(0.0);
  qm.u = es.eigenvectors();
  qm.gc = qm.u.transpose() * gp;
  return qm.gc.allFinite();
}

// Exact trust-region step in the eigenbasis: d_i = gc_i / (lam_i + delta) with
// the smallest damping that keeps ||d|| <= radius.
inline bool trust_region_dir(const QuadModel& qm, double radius,
                             const std::vector<int>& vars,
                             std::array<cmat, 4>& dir) {
  const int n = qm.total;
  const double lam_max = n > 0 ? qm.lam.maxCoeff() : 0.0;
  const double delta_min = 1e-12 * (lam_max + 1.0);
  const auto norm_at = [&](double delta) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double di = qm.gc[i] / (qm.lam[i] + delta);
      s += di * di;
    }
    return std::sqrt(s);
  };
  double delta = delta_min;
  if (norm_at(delta) > radius) {
    double lo = delta_min;
    double hi = std::max(qm.gc.norm() / radius, 2.0 * delta_min);
    while (norm_at(hi) > radius) hi *= 4.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm_at(mid) > radius ? lo : hi) = mid;
    }
    delta = hi;
  }
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = qm.gc[i] / (qm.lam[i] + delta);
  const Eigen::VectorXd d = qm.u * w;
  if (!d.allFinite()) return false;
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (qm.off[vi] < 0) {
      dir[vi] = cmat::Zero(qm.nfull[vi], qm.nfull[vi]);
      continue;
    }
    cmat dv = cmat::Zero(qm.nfull[vi], qm.nfull[vi]);
    for (std::size_t k = 0; k < qm.basis[vi].size(); ++k)
      dv.noalias() += d[qm.off[vi] + static_cast<int>(k)] * qm.basis[vi][k];
    dir[vi] = hermitize(dv);
  }
  return true;
}

// Quadratic model value of the projected displacement cand - x.
inline double quad_pred(const QuadModel& qm, const std::vector<int>& vars,
                        const TransmitState& cand, const TransmitState& x) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(qm.total);
  for (int v : vars) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (qm.off[vi] < 0) continue;
    const cmat delta = *state_var(cand, v) - *state_var(x, v);
    for (std::size_t k = 0; k < qm.basis[vi].size(); ++k)
      c[qm.off[vi] + static_cast<int>(k)] =
          (qm.basis[vi][k].transpose().cwiseProduct(delta)).sum().real();
  }
  return qm.g.dot(c) + 0.5 * c.dot(qm.h * c);
}

}  // namespace detail

inline SolveResult solve_parametric_subproblem(const SubObjective& obj,
                                               const FeasibleSet& feas,
                                               const TransmitState& init,
                                               const SolveOptions& opts = {}) {
  const std::vector<int> vars = active_vars(obj.mode);
  SolveResult res;
  TransmitState x = init;
  detail::project_state(x, feas, vars);
  double fx = obj.eval(x);
  std::array<cmat, 4> gx;
  detail::objective_grad(obj, x, vars, gx);

  double t = 1.0;
  double radius = -1.0;
  detail::QuadModel qm;
  TransmitState x_prev;
  std::array<cmat, 4> g_prev;
  bool have_prev = false;
  double best_seen = fx;
  int since_best = 0;

  int k = 0;
  for (; k < opts.max_iter; ++k) {
    TransmitState mapped = detail::step_state(x, gx, 1.0, vars);
    detail::project_state(mapped, feas, vars);
    res.residual = detail::state_dist(mapped, x, vars);
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    TransmitState xn;
    double fn = 0.0;

    if (detail::build_quad_model(obj, x, vars, gx, feas, qm)) {
      if (detail::factorize_quad_model(qm, vars)) {
        const double scale = feas.cap_a + feas.cap_b + 1.0;
        if (radius <= 0.0) radius = 0.1 * scale;
        radius = std::max(radius, 1e-9 * scale);
        const double pred_floor = 1e-13 * (1.0 + std::abs(fx));
        std::array<cmat, 4> nd;
        if (qm.gc.norm() * radius > pred_floor) {
          for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
            if (!detail::trust_region_dir(qm, radius, vars, nd)) break;
            TransmitState cand = detail::step_state(x, nd, 1.0, vars);
            detail::project_state(cand, feas, vars);
            const double pred_lin = detail::state_ip(gx, cand, x, vars);
            const double pred_quad = detail::quad_pred(qm, vars, cand, x);
            if (pred_quad <= pred_floor || pred_lin <= 0.0) {
              radius *= 0.25;
              continue;
            }
            const double fc = obj.eval(cand);
            const double rho = (fc - fx) / pred_quad;
            if (std::isfinite(fc) && rho >= 0.01) {
              accepted = true;
              const double moved = detail::state_dist(cand, x, vars);
              xn = std::move(cand);
              fn = fc;
              if (rho >= 0.75 && moved >= 0.8 * radius)
                radius = std::min(radius * 2.0, 1e3 * scale);
              else if (rho < 0.25)
                radius *= 0.25;
            } else {
              radius *= 0.25;
            }
          }
        }
      }
    }

    if (!accepted) {
      if (have_prev) {
        double sy = 0.0, ss = 0.0;
        for (int v : vars) {
          const cmat dx = *state_var(x, v) - *state_var(x_prev, v);
          const cmat dg = gx[static_cast<std::size_t>(v)] - g_prev[static_cast<std::size_t>(v)];
          ss += dx.squaredNorm();
          sy += (dx.conjugate().cwiseProduct(dg)).sum().real();
        }
        if (sy < 0.0 && std::isfinite(ss / -sy)) t = std::clamp(ss / -sy, 1e-12, 1e10);
      }
      double trial = t;
      for (int bt = 0; bt < 60; ++bt) {
        xn = detail::step_state(x, gx, trial, vars);
        detail::project_state(xn, feas, vars);
        const double pred = detail::state_ip(gx, xn, x, vars);
        fn = obj.eval(xn);
        if (fn >= fx + 1e-4 * pred && std::isfinite(fn)) {
          accepted = true;
          break;
        }
        trial *= 0.5;
        if (trial < 1e-16) break;
      }
      if (accepted) {
        t = trial;
        if (radius > 0.0)
          radius = std::max(radius, 2.0 * detail::state_dist(xn, x, vars));
      }
    }
    if (!accepted) break;
    x_prev = x;
    g_prev = gx;
    have_prev = true;
    x = std::move(xn);
    fx = fn;
    detail::objective_grad(obj, x, vars, gx);
    if (fx - best_seen > 1e-12 * (1.0 + std::abs(best_seen))) {
      best_seen = fx;
      since_best = 0;
    } else if (++since_best >= 20) {
      break;
    }
  }
  res.iters = k;
  res.x = std::move(x);
  res.value = fx;
  if (!res.converged) {
    TransmitState mapped = detail::step_state(res.x, gx, 1.0, vars);
    detail::project_state(mapped, feas, vars);
    res.residual = detail::state_dist(mapped, res.x, vars);
    res.converged = res.residual <= opts.tol;
  }
  return res;
}

// Single-surrogate convenience overload anchored at `anchor`.
inline SolveResult solve_parametric_subproblem(
    const ChannelSet& ch, const TransmitState& anchor, double lambda,
    const NodeParams& alice, const NodeParams& bob, Mode mode,
    EveDecodingMode eve = {}, bool unit_denominator = false,
    const SolveOptions& opts = {}) {
  const RateModel rm = rate_model(ch, alice, bob, mode, eve);
  const Surrogate sur = build_surrogate(rm, anchor);
  SubObjective obj;
  obj.surrogates.push_back(&sur);
  obj.lambda = lambda;
  obj.unit_denominator = unit_denominator;
  obj.alice = &alice;
  obj.bob = &bob;
  obj.mode = mode;
  return solve_parametric_subproblem(obj, make_feasible_set(alice, bob, mode),
                                     anchor, opts);
}

}  // namespace seemax
