#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seemax {

using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kLn2 = 0.69314718055994530941723212145818;

// Channel matrices of one network realization. h_ba/h_aa are required only
// for bidirectional operation.
struct ChannelSet {
  cmat h_ab;                 // Alice -> Bob, M_B x N_A
  cmat h_ae;                 // Alice -> Eve, M_E x N_A
  cmat h_be;                 // Bob -> Eve,   M_E x N_B
  cmat h_bb;                 // Bob self-interference, M_B x N_B
  std::optional<cmat> h_ba;  // Bob -> Alice, M_A x N_B
  std::optional<cmat> h_aa;  // Alice self-interference, M_A x N_A
};

// Per-node hardware and power model. All power quantities in watts.
struct NodeParams {
  double kappa = 0.0;      // transmit-chain distortion factor
  double beta = 0.0;       // receive-chain distortion factor
  double mu = 1.0;         // power amplifier efficiency, in (0, 1]
  double p_zero = 0.0;     // zero-state consumption
  double p_max = 0.0;      // total power budget
  double p_fd = 0.0;       // self-interference cancellation overhead
  double noise_var = 1.0;  // thermal noise variance at this node's receiver
};

// Transmit covariances: q_* information signals, w_* artificial noise.
// q_b is present only in bidirectional operation.
struct TransmitState {
  cmat q_a, w_a, w_b;
  std::optional<cmat> q_b;
};

enum class Mode { UniFD, UniHD, BD };
enum class Objective { SEE, SEE_p, CS };
enum class BdTarget { EveForA, EveForB, Alice, Bob };

// Eve's handling of the non-intended stream in bidirectional mode:
// rho = 1 treats it as noise (favorable), rho = 0 decodes and cancels it.
struct EveDecodingMode {
  double rho = 0.0;
};

// ---------------------------------------------------------------------------
// Small matrix helpers.

inline cmat hermitize(const cmat& a) { return 0.5 * (a + a.adjoint()); }

inline cmat diag_only(const cmat& a) {
  cmat d = cmat::Zero(a.rows(), a.cols());
  d.diagonal() = a.diagonal();
  return d;
}

inline double retrace(const cmat& a) { return a.trace().real(); }

inline double min_eigenvalue(const cmat& a) {
  Eigen::SelfAdjointEigenSolver<cmat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double logdet2(const cmat& a) {
  Eigen::LLT<cmat> llt(a);
  if (llt.info() == Eigen::Success) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      s += std::log2(std::real(llt.matrixLLT()(i, i)));
    return 2.0 * s;
  }
  Eigen::SelfAdjointEigenSolver<cmat> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("logdet2: eigendecomposition failed");
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    s += std::log2(std::max(es.eigenvalues()(i), 1e-300 * scale));
  return s;
}

inline cmat inverse_psd(const cmat& a) {
  const Eigen::Index n = a.rows();
  const cmat id = cmat::Identity(n, n);
  double delta = 0.0;
  const double scale = 1.0 + std::abs(a.trace().real()) / static_cast<double>(n);
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::LLT<cmat> llt(delta == 0.0 ? a : cmat(a + delta * id));
    if (llt.info() == Eigen::Success) return llt.solve(id);
    delta = (delta == 0.0) ? 1e-12 * scale : delta * 1e3;
  }
  Eigen::SelfAdjointEigenSolver<cmat> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("inverse_psd: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-14 * scale);
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

inline cmat sqrtm_psd(const cmat& a) {
  Eigen::SelfAdjointEigenSolver<cmat> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sqrtm_psd: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Eigenvalue clip onto the PSD cone.
inline cmat project_psd(const cmat& a) {
  Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(a));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("project_psd: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline bool is_valid_covariance(const cmat& a, double herm_tol = 1e-10,
                                double eig_tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
  return min_eigenvalue(hermitize(a)) >= -eig_tol * (1.0 + std::abs(retrace(a)));
}

inline void validate_state(const TransmitState& s, Mode mode) {
  auto check = [](const cmat& a, const char* name) {
    if (!is_valid_covariance(a))
      throw std::invalid_argument(std::string("transmit covariance ") + name +
                                  " is not Hermitian PSD within tolerance");
  };
  check(s.q_a, "q_a");
  check(s.w_a, "w_a");
  check(s.w_b, "w_b");
  if (mode == Mode::BD) {
    if (!s.q_b) throw std::invalid_argument("bidirectional state requires q_b");
    check(*s.q_b, "q_b");
  }
}

// ---------------------------------------------------------------------------
// Affine covariance maps. Every receive covariance in the model is an affine
// function of the transmit covariances built from three primitive terms, each
// carrying its own adjoint so gradients fall out mechanically.

enum class TermKind {
  Sandwich,      // coef * H X H^*
  DiagSandwich,  // coef * H diag(X) H^*
  SandwichDiag   // coef * diag(H X H^*)
};

enum Var : int { VQa = 0, VWa = 1, VWb = 2, VQb = 3 };

inline const cmat* state_var(const TransmitState& s, int v) {
  switch (v) {
    case VQa: return &s.q_a;
    case VWa: return &s.w_a;
    case VWb: return &s.w_b;
    case VQb: return s.q_b ? &*s.q_b : nullptr;
  }
  return nullptr;
}

inline cmat* state_var(TransmitState& s, int v) {
  return const_cast<cmat*>(state_var(static_cast<const TransmitState&>(s), v));
}

struct LinTerm {
  TermKind kind;
  double coef;
  cmat h;

  void accumulate(const cmat& x, cmat& acc) const {
    switch (kind) {
      case TermKind::Sandwich:
        acc.noalias() += coef * (h * x * h.adjoint());
        break;
      case TermKind::DiagSandwich:
        acc.noalias() += coef * (h * x.diagonal().asDiagonal() * h.adjoint());
        break;
      case TermKind::SandwichDiag: {
        const cmat t = h * x * h.adjoint();
        acc.diagonal() += coef * t.diagonal();
        break;
      }
    }
  }

  // Adjoint w.r.t. <A, B> = Re tr(A^* B): returns the gradient contribution
  // of tr(S . term(X)) with respect to X, for Hermitian S.
  cmat adjoint_apply(const cmat& s) const {
    switch (kind) {
      case TermKind::Sandwich:
        return coef * (h.adjoint() * s * h);
      case TermKind::DiagSandwich:
        return diag_only(coef * (h.adjoint() * s * h));
      case TermKind::SandwichDiag:
        return coef * (h.adjoint() * cmat(diag_only(s)) * h);
    }
    return {};
  }
};

struct SigmaMap {
  Eigen::Index rows = 0;
  cmat c0;
  std::array<std::vector<LinTerm>, 4> vars;

  void add(int v, TermKind k, double coef, const cmat& h) {
    if (coef == 0.0) return;
    vars[static_cast<std::size_t>(v)].push_back(LinTerm{k, coef, h});
  }

  cmat eval(const TransmitState& s) const {
    cmat acc = c0;
    for (int v = 0; v < 4; ++v) {
      const cmat* x = state_var(s, v);
      if (!x || x->size() == 0 || x->isZero(0.0)) continue;
      for (const auto& t : vars[static_cast<std::size_t>(v)]) t.accumulate(*x, acc);
    }
    return acc;
  }

  // Accumulates weight * adjoint(S) into g[v] for every term of variable v.
  void add_adjoint(const cmat& s, double weight, std::array<cmat, 4>& g) const {
    for (int v = 0; v < 4; ++v) {
      if (g[static_cast<std::size_t>(v)].size() == 0) continue;
      for (const auto& t : vars[static_cast<std::size_t>(v)])
        g[static_cast<std::size_t>(v)].noalias() += weight * t.adjoint_apply(s);
    }
  }
};

// ---------------------------------------------------------------------------
// Receive-covariance builders.

inline SigmaMap sigma_b_map(const ChannelSet& ch, const NodeParams& alice,
                            const NodeParams& bob) {
  SigmaMap m;
  m.rows = ch.h_ab.rows();
  m.c0 = bob.noise_var * (1.0 + bob.beta) * cmat::Identity(m.rows, m.rows);
  m.add(VWa, TermKind::Sandwich, 1.0, ch.h_ab);
  m.add(VWa, TermKind::DiagSandwich, alice.kappa, ch.h_ab);
  m.add(VWa, TermKind::SandwichDiag, bob.beta, ch.h_ab);
  m.add(VQa, TermKind::DiagSandwich, alice.kappa, ch.h_ab);
  m.add(VQa, TermKind::SandwichDiag, bob.beta, ch.h_ab);
  m.add(VWb, TermKind::DiagSandwich, bob.kappa, ch.h_bb);
  m.add(VWb, TermKind::SandwichDiag, bob.beta, ch.h_bb);
  return m;
}

inline SigmaMap sigma_e_map(const ChannelSet& ch, const NodeParams& alice,
                            const NodeParams& bob) {
  SigmaMap m;
  m.rows = ch.h_ae.rows();
  m.c0 = bob.noise_var * cmat::Identity(m.rows, m.rows);
  m.add(VWa, TermKind::Sandwich, 1.0, ch.h_ae);
  m.add(VWa, TermKind::DiagSandwich, alice.kappa, ch.h_ae);
  m.add(VQa, TermKind::DiagSandwich, alice.kappa, ch.h_ae);
  m.add(VWb, TermKind::Sandwich, 1.0, ch.h_be);
  m.add(VWb, TermKind::DiagSandwich, bob.kappa, ch.h_be);
  return m;
}

inline SigmaMap sigma_bd_map(const ChannelSet& ch, const NodeParams& alice,
                             const NodeParams& bob, EveDecodingMode eve,
                             BdTarget which) {
  switch (which) {
    case BdTarget::EveForA: {
      SigmaMap m = sigma_e_map(ch, alice, bob);
      m.add(VQb, TermKind::DiagSandwich, bob.kappa, ch.h_be);
      m.add(VQb, TermKind::Sandwich, eve.rho, ch.h_be);
      return m;
    }
    case BdTarget::EveForB: {
      SigmaMap m = sigma_e_map(ch, alice, bob);
      m.add(VQb, TermKind::DiagSandwich, bob.kappa, ch.h_be);
      m.add(VQa, TermKind::Sandwich, eve.rho, ch.h_ae);
      return m;
    }
    case BdTarget::Bob: {
      SigmaMap m = sigma_b_map(ch, alice, bob);
      m.add(VQb, TermKind::DiagSandwich, bob.kappa, ch.h_bb);
      m.add(VQb, TermKind::SandwichDiag, bob.beta, ch.h_bb);
      return m;
    }
    case BdTarget::Alice: {
      if (!ch.h_ba || !ch.h_aa)
        throw std::invalid_argument(
            "sigma_bd_map: bidirectional channels h_ba/h_aa are missing");
      SigmaMap m;
      m.rows = ch.h_ba->rows();
      m.c0 = alice.noise_var * (1.0 + alice.beta) * cmat::Identity(m.rows, m.rows);
      m.add(VWb, TermKind::Sandwich, 1.0, *ch.h_ba);
      m.add(VWb, TermKind::DiagSandwich, bob.kappa, *ch.h_ba);
      m.add(VWb, TermKind::SandwichDiag, alice.beta, *ch.h_ba);
      m.add(VQb, TermKind::DiagSandwich, bob.kappa, *ch.h_ba);
      m.add(VQb, TermKind::SandwichDiag, alice.beta, *ch.h_ba);
      m.add(VWa, TermKind::DiagSandwich, alice.kappa, *ch.h_aa);
      m.add(VWa, TermKind::SandwichDiag, alice.beta, *ch.h_aa);
      m.add(VQa, TermKind::DiagSandwich, alice.kappa, *ch.h_aa);
      m.add(VQa, TermKind::SandwichDiag, alice.beta, *ch.h_aa);
      return m;
    }
  }
  throw std::invalid_argument("sigma_bd_map: unknown target");
}

inline cmat build_sigma_b(const ChannelSet& ch, const TransmitState& s,
                          const NodeParams& alice, const NodeParams& bob) {
  return sigma_b_map(ch, alice, bob).eval(s);
}

inline cmat build_sigma_e(const ChannelSet& ch, const TransmitState& s,
                          const NodeParams& alice, const NodeParams& bob) {
  return sigma_e_map(ch, alice, bob).eval(s);
}

inline cmat build_sigma_bd(const ChannelSet& ch, const TransmitState& s,
                           const NodeParams& alice, const NodeParams& bob,
                           EveDecodingMode eve, BdTarget which) {
  return sigma_bd_map(ch, alice, bob, eve, which).eval(s);
}

// ---------------------------------------------------------------------------
// Secrecy rate as a signed sum of log-dets. Terms [0, dir_split) carry the
// Alice->Bob direction, the rest (bidirectional only) Bob->Alice.

struct SignedMap {
  double sign;
  SigmaMap map;
};

struct RateModel {
  std::vector<SignedMap> terms;
  std::size_t dir_split = 0;
};

inline RateModel rate_model(const ChannelSet& ch, const NodeParams& alice,
                            const NodeParams& bob, Mode mode,
                            EveDecodingMode eve = {}) {
  RateModel rm;
  auto push = [&rm](double sign, SigmaMap m) {
    rm.terms.push_back(SignedMap{sign, std::move(m)});
  };
  if (mode == Mode::BD) {
    const SigmaMap sb = sigma_bd_map(ch, alice, bob, eve, BdTarget::Bob);
    const SigmaMap sea = sigma_bd_map(ch, alice, bob, eve, BdTarget::EveForA);
    SigmaMap sb_sig = sb;
    sb_sig.add(VQa, TermKind::Sandwich, 1.0, ch.h_ab);
    SigmaMap sea_sig = sea;
    sea_sig.add(VQa, TermKind::Sandwich, 1.0, ch.h_ae);
    push(+1.0, std::move(sb_sig));
    push(-1.0, sb);
    push(-1.0, std::move(sea_sig));
    push(+1.0, sea);
    rm.dir_split = 4;
    const SigmaMap sa = sigma_bd_map(ch, alice, bob, eve, BdTarget::Alice);
    const SigmaMap seb = sigma_bd_map(ch, alice, bob, eve, BdTarget::EveForB);
    SigmaMap sa_sig = sa;
    sa_sig.add(VQb, TermKind::Sandwich, 1.0, *ch.h_ba);
    SigmaMap seb_sig = seb;
    seb_sig.add(VQb, TermKind::Sandwich, 1.0, ch.h_be);
    push(+1.0, std::move(sa_sig));
    push(-1.0, sa);
    push(-1.0, std::move(seb_sig));
    push(+1.0, seb);
  } else {
    const SigmaMap sb = sigma_b_map(ch, alice, bob);
    const SigmaMap se = sigma_e_map(ch, alice, bob);
    SigmaMap sb_sig = sb;
    sb_sig.add(VQa, TermKind::Sandwich, 1.0, ch.h_ab);
    SigmaMap se_sig = se;
    se_sig.add(VQa, TermKind::Sandwich, 1.0, ch.h_ae);
    push(+1.0, std::move(sb_sig));
    push(-1.0, sb);
    push(-1.0, std::move(se_sig));
    push(+1.0, se);
    rm.dir_split = 4;
  }
  return rm;
}

// Per-direction secrecy rates in bits (unclipped).
inline std::pair<double, double> secrecy_components(const RateModel& rm,
                                                    const TransmitState& s) {
  double c_ab = 0.0, c_ba = 0.0;
  for (std::size_t i = 0; i < rm.terms.size(); ++i) {
    const double v = rm.terms[i].sign * logdet2(rm.terms[i].map.eval(s));
    (i < rm.dir_split ? c_ab : c_ba) += v;
  }
  return {c_ab, c_ba};
}

inline std::pair<double, double> secrecy_components(
    const ChannelSet& ch, const TransmitState& s, const NodeParams& alice,
    const NodeParams& bob, Mode mode, EveDecodingMode eve = {}) {
  return secrecy_components(rate_model(ch, alice, bob, mode, eve), s);
}

// Sum-rate over directions, unclipped; exactly zero when the information
// covariances vanish.
inline double secrecy_rate(const ChannelSet& ch, const TransmitState& s,
                           const NodeParams& alice, const NodeParams& bob,
                           Mode mode = Mode::UniFD, EveDecodingMode eve = {}) {
  auto [c_ab, c_ba] = secrecy_components(ch, s, alice, bob, mode, eve);
  return c_ab + c_ba;
}

// ---------------------------------------------------------------------------
// Power model.

inline double total_power(const TransmitState& s, const NodeParams& alice,
                          const NodeParams& bob, Mode mode) {
  double tr_a = retrace(s.q_a) + retrace(s.w_a);
  double tr_b = retrace(s.w_b);
  if (mode == Mode::BD && s.q_b) tr_b += retrace(*s.q_b);
  double p_a = alice.p_zero + (1.0 + alice.kappa) / alice.mu * tr_a;
  double p_b = bob.p_zero + (1.0 + bob.kappa) / bob.mu * tr_b;
  if (mode == Mode::BD) p_a += alice.p_fd;
  if (mode != Mode::UniHD) p_b += bob.p_fd;
  return p_a + p_b;
}

// Largest admissible tr(Q_a + W_a) and tr(W_b [+ Q_b]) under the per-node
// budget. cap_b = 0 in half-duplex mode.
struct FeasibleSet {
  double cap_a = 0.0;
  double cap_b = 0.0;
};

inline FeasibleSet make_feasible_set(const NodeParams& alice,
                                     const NodeParams& bob, Mode mode) {
  FeasibleSet f;
  double budget_a = alice.p_max - alice.p_zero - (mode == Mode::BD ? alice.p_fd : 0.0);
  double budget_b = bob.p_max - bob.p_zero - (mode == Mode::UniHD ? 0.0 : bob.p_fd);
  if (budget_a < 0.0 || budget_b < 0.0)
    throw std::invalid_argument(
        "make_feasible_set: static consumption exceeds the power budget");
  f.cap_a = budget_a * alice.mu / (1.0 + alice.kappa);
  f.cap_b = (mode == Mode::UniHD) ? 0.0 : budget_b * bob.mu / (1.0 + bob.kappa);
  return f;
}

// ---------------------------------------------------------------------------
// Reported objective values. Clipping to nonnegative rates happens here and
// only here; optimization runs on the unclipped surrogate.

inline double see_value(const ChannelSet& ch, const TransmitState& s,
                        const NodeParams& alice, const NodeParams& bob,
                        Mode mode, Objective objective,
                        EveDecodingMode eve = {}) {
  auto [c_ab, c_ba] = secrecy_components(ch, s, alice, bob, mode, eve);
  switch (objective) {
    case Objective::SEE:
      return (std::max(c_ab, 0.0) + std::max(c_ba, 0.0)) /
             total_power(s, alice, bob, mode);
    case Objective::SEE_p:
      return (c_ab + c_ba) / total_power(s, alice, bob, mode);
    case Objective::CS:
      return c_ab + c_ba;
  }
  throw std::invalid_argument("see_value: unknown objective");
}

inline TransmitState zero_state(int n_a, int n_b, bool bidirectional) {
  TransmitState s;
  s.q_a = cmat::Zero(n_a, n_a);
  s.w_a = cmat::Zero(n_a, n_a);
  s.w_b = cmat::Zero(n_b, n_b);
  if (bidirectional) s.q_b = cmat::Zero(n_b, n_b);
  return s;
}

}  // namespace seemax
