#pragma once

#include "channels.hpp"
#include "convex_inner.hpp"
#include "fractional.hpp"
#include "model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seemax {

// ---------------------------------------------------------------------------
// Spatial initialization: unit-trace covariance maximizing a signal-to-
// leakage style ratio (tr(F Q F^*) + nu_f) / (tr(G Q G^*) + nu_g) over
// tr(Q) = 1, via the dominant generalized eigenvector of the lifted pencil.

namespace detail {

inline cmat kron_identity(const cmat& m, int n) {  // I_n (x) m
  const Eigen::Index r = m.rows();
  cmat k = cmat::Zero(n * r, n * r);
  for (int i = 0; i < n; ++i) k.block(i * r, i * r, r, r) = m;
  return k;
}

inline cmat vstack(const cmat& a, const cmat& b) {
  cmat m(a.rows() + b.rows(), a.cols());
  m.topRows(a.rows()) = a;
  m.bottomRows(b.rows()) = b;
  return m;
}

}  // namespace detail

inline cmat init_spatial(const cmat& f, const cmat& g, double nu_f, double nu_g) {
  if (f.cols() != g.cols())
    throw std::invalid_argument("init_spatial: F and G must share the column count");
  const int n = static_cast<int>(f.cols());
  const cmat ff = hermitize(f.adjoint() * f);
  const cmat gg = hermitize(g.adjoint() * g);
  const cmat id = cmat::Identity(n * n, n * n);
  const cmat a = detail::kron_identity(ff, n) + nu_f * id;
  const cmat b = detail::kron_identity(gg, n) + nu_g * id;
  if (min_eigenvalue(b) <= 1e-14 * (1.0 + retrace(b) / (n * n)))
    throw std::invalid_argument(
        "init_spatial: undesired-side operator must be positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<cmat> es(a, b);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("init_spatial: generalized eigensolver failed");
  cvec v = es.eigenvectors().col(n * n - 1);
  Eigen::Index jmax = 0;
  v.cwiseAbs().maxCoeff(&jmax);
  const cplx pivot = v(jmax);
  if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
  cmat s(n, n);
  for (int c = 0; c < n; ++c) s.col(c) = v.segment(c * n, n);
  cmat q = s * s.adjoint();
  const double tr = retrace(q);
  if (!(tr > 0.0)) throw std::runtime_error("init_spatial: degenerate eigenvector");
  return hermitize(q / tr);
}

// ---------------------------------------------------------------------------
// Initial transmit state: spatial beams for every variable, then one pass of
// scalar power allocation over the objective profile, cycling Q_a, W_a, W_b
// (and Q_b in bidirectional mode).

inline TransmitState init_state(const ChannelSet& ch, const NodeParams& alice,
                                const NodeParams& bob, Mode mode,
                                Objective objective, EveDecodingMode eve = {}) {
  const FeasibleSet feas = make_feasible_set(alice, bob, mode);
  const int n_a = static_cast<int>(ch.h_ab.cols());
  const int n_b = static_cast<int>(ch.h_bb.cols());
  TransmitState s = zero_state(n_a, n_b, mode == Mode::BD);

  const double var_b = bob.noise_var;
  const double var_e = bob.noise_var;
  const double var_a = alice.noise_var;
  auto leakage_sqrt = [](const cmat& h, const NodeParams& np) {
    const cmat hh = h.adjoint() * h;
    return sqrtm_psd(np.kappa * diag_only(hh) + np.beta * hh);
  };

  cmat qa_hat = init_spatial(ch.h_ab, ch.h_ae, var_b, var_e);
  cmat wa_hat, wb_hat, qb_hat;
  if (mode == Mode::BD) {
    const cmat si_a = leakage_sqrt(*ch.h_aa, alice);
    const cmat si_b = leakage_sqrt(ch.h_bb, bob);
    wa_hat = init_spatial(ch.h_ae, detail::vstack(ch.h_ab, si_a), var_e, var_b);
    wb_hat = init_spatial(ch.h_be, detail::vstack(*ch.h_ba, si_b), var_e, var_a);
    qb_hat = init_spatial(*ch.h_ba, ch.h_be, var_a, var_e);
  } else {
    wa_hat = init_spatial(ch.h_ae, ch.h_ab, var_e, var_b);
    if (mode == Mode::UniFD)
      wb_hat = init_spatial(ch.h_be, leakage_sqrt(ch.h_bb, bob), var_e, var_b);
  }

  const RateModel rm = rate_model(ch, alice, bob, mode, eve);
  const bool unit_den = (objective == Objective::CS);

  auto allocate = [&](int v, const cmat& beam) {
    if (beam.size() == 0) return;
    const bool node_a = (v == VQa || v == VWa);
    double used = 0.0;
    for (int o : {VQa, VWa, VWb, VQb}) {
      if (o == v || ((o == VQa || o == VWa) != node_a)) continue;
      const cmat* x = state_var(s, o);
      if (x && x->size() != 0) used += retrace(*x);
    }
    const double cap = (node_a ? feas.cap_a : feas.cap_b) - used;
    if (cap <= 0.0) return;
    double ref = 0.0;
    {
      double l1 = 0.0, l2 = 0.0;
      for (const auto& term : rm.terms)
        (term.sign > 0.0 ? l1 : l2) += logdet2(term.map.eval(s));
      ref = 0.5 * (l1 + l2);
    }
    ProfileFn profile = [&, v, beam, ref](double p) {
      TransmitState tmp = s;
      *state_var(tmp, v) = p * beam;
      double l1 = 0.0, l2 = 0.0;
      for (const auto& term : rm.terms)
        (term.sign > 0.0 ? l1 : l2) += logdet2(term.map.eval(tmp));
      ProfileSample out;
      out.num_b = std::exp2(l1 - ref);
      out.num_e = std::exp2(l2 - ref);
      out.den = unit_den ? 1.0 : total_power(tmp, alice, bob, mode);
      return out;
    };
    const PowerAllocation pa = allocate_power(fit_power_profile(profile, cap), 1e-9);
    if (pa.p > 0.0) *state_var(s, v) = pa.p * beam;
  };

  allocate(VQa, qa_hat);
  allocate(VWa, wa_hat);
  if (mode != Mode::UniHD) allocate(VWb, wb_hat);
  if (mode == Mode::BD) allocate(VQb, qb_hat);
  return s;
}

// ---------------------------------------------------------------------------
// Successive inner-approximation maximization of the chosen objective: outer
// loop rebuilds the concave minorant at the incumbent, inner loop runs the
// fractional (Dinkelbach) iteration with warm-started subproblem solves.

struct SuiapConfig {
  double c_min = 1e-6;      // inner termination on the auxiliary objective
  double lambda_min = 1e-5; // relative outer termination on the level growth
  int max_outer = 50;
  int max_inner = 30;
  SolveOptions subproblem{};
};

struct SuiapResult {
  TransmitState state;
  double see = 0.0;    // reported objective (clipped)
  double rate = 0.0;   // clipped secrecy rate, bits
  double power = 0.0;  // consumed power, watts
  double lambda = 0.0; // final fractional level
  std::vector<double> see_trace;  // unclipped objective ratio per outer pass
  int outer_iters = 0;
  int inner_iters = 0;
  bool converged = false;
};

inline SuiapResult suiap_run(const ChannelSet& ch, const NodeParams& alice,
                             const NodeParams& bob, Mode mode,
                             Objective objective, const SuiapConfig& cfg = {},
                             EveDecodingMode eve = {}) {
  const RateModel rm = rate_model(ch, alice, bob, mode, eve);
  const FeasibleSet feas = make_feasible_set(alice, bob, mode);
  const bool unit_den = (objective == Objective::CS);
  auto ratio = [&](const TransmitState& s) {
    const auto [c_ab, c_ba] = secrecy_components(rm, s);
    const double num = c_ab + c_ba;
    return unit_den ? num : num / total_power(s, alice, bob, mode);
  };

  SuiapResult res;
  TransmitState state = init_state(ch, alice, bob, mode, objective, eve);
  double lambda = ratio(state);
  res.see_trace.push_back(lambda);

  for (int l = 0; l < cfg.max_outer; ++l) {
    const TransmitState anchor = state;
    const double lambda_start = lambda;
    const double floor_val = ratio(anchor);

    const Surrogate sur = build_surrogate(rm, anchor);
    SubObjective obj;
    obj.surrogates.push_back(&sur);
    obj.unit_denominator = unit_den;
    obj.alice = &alice;
    obj.bob = &bob;
    obj.mode = mode;

    TransmitState warm = anchor;
    FractionalProblem<TransmitState> fp;
    fp.numerator = [&obj](const TransmitState& s) { return obj.numerator(s); };
    fp.denominator = [&obj](const TransmitState& s) { return obj.denominator(s); };
    fp.parametric_argmax = [&](double lam) {
      obj.lambda = lam;
      SolveResult sr = solve_parametric_subproblem(obj, feas, warm, cfg.subproblem);
      warm = sr.x;
      return sr.x;
    };
    const auto dr =
        dinkelbach_maximize(fp, cfg.c_min, cfg.max_inner, lambda, floor_val - 1e-9);

    state = dr.x;
    lambda = dr.lambda;
    res.inner_iters += dr.iterations;
    res.outer_iters = l + 1;
    res.see_trace.push_back(ratio(state));
    if (lambda - lambda_start <= cfg.lambda_min * (1.0 + std::abs(lambda))) {
      res.converged = true;
      break;
    }
  }

  const auto [c_ab, c_ba] = secrecy_components(rm, state);
  res.rate = std::max(c_ab, 0.0) + std::max(c_ba, 0.0);
  res.power = total_power(state, alice, bob, mode);
  res.see = unit_den ? res.rate : res.rate / res.power;
  res.lambda = lambda;
  res.state = std::move(state);
  return res;
}

// Bidirectional variant; at convergence both per-direction rates are
// nonnegative up to solver slack.
inline SuiapResult suiap_bd_run(const ChannelSet& ch, const NodeParams& alice,
                                const NodeParams& bob, EveDecodingMode eve,
                                Objective objective,
                                const SuiapConfig& cfg = {}) {
  return suiap_run(ch, alice, bob, Mode::BD, objective, cfg, eve);
}

// ---------------------------------------------------------------------------
// Bidirectional half-duplex baseline: two time-shared one-directional phases,
// each optimized as a half-duplex link.

inline ChannelSet swap_roles(const ChannelSet& ch) {
  if (!ch.h_ba || !ch.h_aa)
    throw std::invalid_argument("swap_roles: h_ba and h_aa are required");
  ChannelSet r;
  r.h_ab = *ch.h_ba;
  r.h_ae = ch.h_be;
  r.h_be = ch.h_ae;
  r.h_bb = *ch.h_aa;
  r.h_ba = ch.h_ab;
  r.h_aa = ch.h_bb;
  return r;
}

inline SuiapResult tdd_baseline_run(const ChannelSet& ch, const NodeParams& alice,
                                    const NodeParams& bob, Objective objective,
                                    const SuiapConfig& cfg = {}) {
  const SuiapResult p1 = suiap_run(ch, alice, bob, Mode::UniHD, objective, cfg);
  const SuiapResult p2 =
      suiap_run(swap_roles(ch), bob, alice, Mode::UniHD, objective, cfg);
  SuiapResult res;
  res.state = p1.state;
  res.rate = 0.5 * (p1.rate + p2.rate);
  res.power = 0.5 * (p1.power + p2.power);
  res.see = (objective == Objective::CS) ? res.rate : res.rate / res.power;
  res.lambda = 0.5 * (p1.lambda + p2.lambda);
  res.see_trace = p1.see_trace;
  res.outer_iters = p1.outer_iters + p2.outer_iters;
  res.inner_iters = p1.inner_iters + p2.inner_iters;
  res.converged = p1.converged && p2.converged;
  return res;
}

}  // namespace seemax
