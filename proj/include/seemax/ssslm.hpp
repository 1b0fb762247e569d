#pragma once

#include "channels.hpp"
#include "convex_inner.hpp"
#include "model.hpp"
#include "suiap.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace seemax {

// Statistical-CSI design: maximizes the sample average of the clipped
// secrecy rates over an ensemble of eavesdropper channel realizations. The
// clipped members (set G_C1) keep their kink and are handled by enumerating
// sign combinations; the rest are linearized like the exact-CSI design.

struct SsslmConfig {
  double c_min = 1e-6;
  double lambda_min = 1e-5;  // relative termination on the level growth
  double zero_tol = 1e-6;    // relative threshold declaring a member clipped
  int max_outer = 8;         // partition refreshes
  int max_intermediate = 20;
  int max_inner = 30;
  int gc1_cap = 12;          // hard cap on |G_C1| (combination count 2^n)
  SolveOptions subproblem{};
};

namespace detail {

inline std::vector<RateModel> ensemble_models(const Ensemble& ens,
                                              const NodeParams& alice,
                                              const NodeParams& bob, Mode mode) {
  std::vector<RateModel> ms;
  ms.reserve(ens.realizations.size());
  for (std::size_t i = 0; i < ens.realizations.size(); ++i)
    ms.push_back(rate_model(ensemble_channels(ens, static_cast<int>(i)), alice,
                            bob, mode));
  return ms;
}

inline double member_rate(const RateModel& rm, const TransmitState& s) {
  const auto [c_ab, c_ba] = secrecy_components(rm, s);
  return c_ab + c_ba;
}

inline double saa_models(const std::vector<RateModel>& models,
                         const TransmitState& s, const NodeParams& alice,
                         const NodeParams& bob, Mode mode, bool unit_den) {
  double sum = 0.0;
  for (const auto& rm : models) sum += std::max(member_rate(rm, s), 0.0);
  const double mean = sum / static_cast<double>(models.size());
  return unit_den ? mean : mean / total_power(s, alice, bob, mode);
}

}  // namespace detail

// Sample-average objective: mean clipped secrecy rate over the ensemble,
// divided by the consumed power (or by one for the rate-only recipe).
inline double saa(const Ensemble& ens, const TransmitState& s,
                  const NodeParams& alice, const NodeParams& bob, Mode mode,
                  bool unit_denominator = false) {
  return detail::saa_models(detail::ensemble_models(ens, alice, bob, mode), s,
                            alice, bob, mode, unit_denominator);
}

// Monotone update of the kinked-member set: current members plus every
// realization whose rate at `s` sits at the clip boundary within tolerance.
// Strictly negative members stay outside; the minorant drops them instead.
inline std::set<int> update_gc1(const Ensemble& ens, const std::set<int>& current,
                                const TransmitState& s, const NodeParams& alice,
                                const NodeParams& bob, Mode mode,
                                double zero_tol = 1e-6) {
  std::set<int> out = current;
  for (std::size_t i = 0; i < ens.realizations.size(); ++i) {
    const double c = detail::member_rate(
        rate_model(ensemble_channels(ens, static_cast<int>(i)), alice, bob, mode), s);
    if (std::abs(c) <= zero_tol * (1.0 + std::abs(c))) out.insert(static_cast<int>(i));
  }
  return out;
}

inline std::set<int> update_gc1(const Ensemble& ens, const TransmitState& s,
                                const NodeParams& alice, const NodeParams& bob,
                                Mode mode, double zero_tol = 1e-6) {
  return update_gc1(ens, ens.g_c1, s, alice, bob, mode, zero_tol);
}

// Minorant of the sample-average objective anchored at `anchor`: clipped
// surrogates for G_C1 members, plain surrogates for the members nonnegative
// at the anchor, remaining members dropped.
inline double saa_lb(const Ensemble& ens, const TransmitState& s,
                     const TransmitState& anchor, const std::set<int>& g_c1,
                     const NodeParams& alice, const NodeParams& bob, Mode mode,
                     bool unit_denominator = false) {
  const auto models = detail::ensemble_models(ens, alice, bob, mode);
  double sum = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Surrogate sur = build_surrogate(models[i], anchor);
    const double v = sur.eval(s);
    if (g_c1.count(static_cast<int>(i))) {
      sum += std::max(v, 0.0);
    } else if (detail::member_rate(models[i], anchor) >= 0.0) {
      sum += v;
    }
  }
  const double mean = sum / static_cast<double>(models.size());
  return unit_denominator ? mean
                          : mean / total_power(s, alice, bob, mode);
}

struct SsslmInnerResult {
  TransmitState state;
  double lambda = 0.0;
  double eta = 0.0;
  std::vector<std::uint32_t> combos;  // surviving sign combinations
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// One intermediate pass: fractional iteration over the anchored minorant,
// solving one subproblem per surviving sign combination and updating the
// level at the jointly optimal pair. Combinations whose auxiliary optimum
// goes negative are pruned permanently (the incumbent is always kept).
inline SsslmInnerResult ssslm_inner_models(
    const std::vector<RateModel>& models, const TransmitState& anchor,
    const std::vector<int>& gc1_sorted, std::vector<std::uint32_t> combos,
    double lambda0, double lambda_floor, const NodeParams& alice,
    const NodeParams& bob, Mode mode, bool unit_den, const SsslmConfig& cfg) {
  const double w = 1.0 / static_cast<double>(models.size());
  const FeasibleSet feas = make_feasible_set(alice, bob, mode);

  std::vector<Surrogate> gc1_surs;
  gc1_surs.reserve(gc1_sorted.size());
  for (int i : gc1_sorted)
    gc1_surs.push_back(build_surrogate(models[static_cast<std::size_t>(i)], anchor, w));

  std::vector<Surrogate> base_surs;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (std::find(gc1_sorted.begin(), gc1_sorted.end(), static_cast<int>(i)) !=
        gc1_sorted.end())
      continue;
    if (member_rate(models[i], anchor) >= 0.0)
      base_surs.push_back(build_surrogate(models[i], anchor, w));
  }

  auto make_obj = [&](std::uint32_t mask, double lambda) {
    SubObjective obj;
    obj.surrogates.reserve(base_surs.size() + gc1_surs.size());
    for (const auto& s : base_surs) obj.surrogates.push_back(&s);
    for (std::size_t b = 0; b < gc1_surs.size(); ++b)
      if (mask & (1u << b)) obj.surrogates.push_back(&gc1_surs[b]);
    obj.lambda = lambda;
    obj.unit_denominator = unit_den;
    obj.alice = &alice;
    obj.bob = &bob;
    obj.mode = mode;
    return obj;
  };

  std::map<std::uint32_t, TransmitState> warm;
  SsslmInnerResult res;
  res.lambda = lambda0;
  for (int k = 0; k < cfg.max_inner; ++k) {
    double best_g = -std::numeric_limits<double>::infinity();
    std::uint32_t best_a = combos.front();
    TransmitState best_x;
    std::vector<double> gvals(combos.size());
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
      const std::uint32_t a = combos[ci];
      auto it = warm.find(a);
      if (it == warm.end()) it = warm.emplace(a, anchor).first;
      const SubObjective obj = make_obj(a, res.lambda);
      SolveResult sr = solve_parametric_subproblem(obj, feas, it->second,
                                                   cfg.subproblem);
      it->second = sr.x;
      gvals[ci] = sr.value;
      if (sr.value > best_g) {
        best_g = sr.value;
        best_a = a;
        best_x = std::move(sr.x);
      }
    }
    const SubObjective best_obj = make_obj(best_a, res.lambda);
    const double den = best_obj.denominator(best_x);
    const double num = best_g + res.lambda * den;
    const double prune_tol = 1e-10 * (1.0 + std::abs(res.lambda));
    std::vector<std::uint32_t> keep;
    for (std::size_t ci = 0; ci < combos.size(); ++ci)
      if (combos[ci] == best_a || gvals[ci] >= -prune_tol)
        keep.push_back(combos[ci]);
    combos = std::move(keep);
    res.state = std::move(best_x);
    res.eta = best_g;
    res.lambda = num / den;
    res.iterations = k + 1;
    if (res.eta < cfg.c_min && res.lambda >= lambda_floor - 1e-9) {
      res.converged = true;
      break;
    }
  }
  res.combos = std::move(combos);
  return res;
}

}  // namespace detail

// Spec-shaped entry point over an ensemble.
inline SsslmInnerResult ssslm_inner_max(const Ensemble& ens,
                                        const TransmitState& anchor,
                                        const std::set<int>& g_c1,
                                        std::vector<std::uint32_t> combos,
                                        double lambda0, const NodeParams& alice,
                                        const NodeParams& bob, Mode mode,
                                        bool unit_denominator = false,
                                        const SsslmConfig& cfg = {}) {
  const auto models = detail::ensemble_models(ens, alice, bob, mode);
  const std::vector<int> gc1_sorted(g_c1.begin(), g_c1.end());
  if (combos.empty())
    for (std::uint32_t a = 0; a < (1u << gc1_sorted.size()); ++a)
      combos.push_back(a);
  return detail::ssslm_inner_models(
      models, anchor, gc1_sorted, std::move(combos), lambda0,
      -std::numeric_limits<double>::infinity(), alice, bob, mode,
      unit_denominator, cfg);
}

struct SsslmResult {
  TransmitState state;
  double saa = 0.0;    // final sample-average objective (clipped)
  double rate = 0.0;   // mean clipped secrecy rate over the ensemble, bits
  double power = 0.0;  // consumed power, watts
  double lambda = 0.0;
  std::vector<double> saa_trace;  // objective at each intermediate anchor
  std::set<int> g_c1;
  int outer_iters = 0;
  int inner_iters = 0;
  bool converged = false;
};

inline SsslmResult ssslm_run(const Ensemble& ens, const NodeParams& alice,
                             const NodeParams& bob, Mode mode,
                             Objective objective, const SsslmConfig& cfg,
                             const TransmitState& init) {
  if (mode == Mode::BD)
    throw std::invalid_argument("ssslm_run: bidirectional mode is not supported");
  if (ens.realizations.empty())
    throw std::invalid_argument("ssslm_run: ensemble has no realizations");
  const bool unit_den = (objective == Objective::CS);
  const auto models = detail::ensemble_models(ens, alice, bob, mode);

  SsslmResult res;
  TransmitState state = init;
  std::set<int> g_c1 = ens.g_c1;
  double lambda = detail::saa_models(models, state, alice, bob, mode, unit_den);
  res.saa_trace.push_back(lambda);

  for (int m = 0; m < cfg.max_outer; ++m) {
    std::set<int> g_new = g_c1;
    for (std::size_t i = 0; i < models.size(); ++i) {
      const double c = detail::member_rate(models[i], state);
      if (std::abs(c) <= cfg.zero_tol * (1.0 + std::abs(c)))
        g_new.insert(static_cast<int>(i));
    }
    if (static_cast<int>(g_new.size()) > cfg.gc1_cap) {
      std::ostringstream msg;
      msg << "ssslm_run: clipped-member set has " << g_new.size()
          << " realizations, exceeding the cap of " << cfg.gc1_cap
          << "; the combination enumeration would need " << (1u << g_new.size())
          << " subproblems per step";
      throw std::runtime_error(msg.str());
    }
    const bool stable = (g_new == g_c1) && m > 0;
    g_c1 = g_new;
    const std::vector<int> gc1_sorted(g_c1.begin(), g_c1.end());

    for (int l = 0; l < cfg.max_intermediate; ++l) {
      const TransmitState anchor = state;
      const double lambda_start = lambda;
      const double floor_val =
          detail::saa_models(models, anchor, alice, bob, mode, unit_den);
      std::vector<std::uint32_t> combos;
      for (std::uint32_t a = 0; a < (1u << gc1_sorted.size()); ++a)
        combos.push_back(a);
      const auto inner = detail::ssslm_inner_models(
          models, anchor, gc1_sorted, std::move(combos), lambda, floor_val,
          alice, bob, mode, unit_den, cfg);
      state = inner.state;
      lambda = inner.lambda;
      res.inner_iters += inner.iterations;
      res.saa_trace.push_back(
          detail::saa_models(models, state, alice, bob, mode, unit_den));
      if (lambda - lambda_start <= cfg.lambda_min * (1.0 + std::abs(lambda)))
        break;
    }
    res.outer_iters = m + 1;
    if (stable) {
      res.converged = true;
      break;
    }
  }

  res.saa = detail::saa_models(models, state, alice, bob, mode, unit_den);
  res.power = total_power(state, alice, bob, mode);
  res.rate = unit_den ? res.saa : res.saa * res.power;
  res.lambda = lambda;
  res.g_c1 = std::move(g_c1);
  res.state = std::move(state);
  return res;
}

// Default initialization: exact-CSI design on the ensemble's mean channels.
inline SsslmResult ssslm_run(const Ensemble& ens, const NodeParams& alice,
                             const NodeParams& bob, Mode mode,
                             Objective objective, const SsslmConfig& cfg = {}) {
  SuiapConfig icfg;
  icfg.c_min = cfg.c_min;
  icfg.lambda_min = cfg.lambda_min;
  icfg.subproblem = cfg.subproblem;
  const SuiapResult init = suiap_run(ens.base, alice, bob, mode, objective, icfg);
  return ssslm_run(ens, alice, bob, mode, objective, cfg, init.state);
}

}  // namespace seemax
