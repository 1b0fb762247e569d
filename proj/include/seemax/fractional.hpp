#pragma once

#include "model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace seemax {

// ---------------------------------------------------------------------------
// Dinkelbach iteration for max f(x)/g(x) with g > 0 and a parametric solver
// for max f(x) - lambda g(x).

template <class X>
struct FractionalProblem {
  std::function<double(const X&)> numerator;
  std::function<double(const X&)> denominator;
  std::function<X(double)> parametric_argmax;
};

template <class X>
struct DinkelbachResult {
  X x{};
  double lambda = 0.0;
  double eta = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> lambda_trace;
};

// lambda0 must not exceed the optimal ratio; lambda_floor forces extra
// iterations until the ratio reaches it (used to keep outer-loop objective
// traces monotone when the parametric solver warm-starts at the anchor).
template <class X>
DinkelbachResult<X> dinkelbach_maximize(
    const FractionalProblem<X>& problem, double eps, int max_iter,
    double lambda0 = 0.0,
    double lambda_floor = -std::numeric_limits<double>::infinity()) {
  if (!(eps > 0.0)) throw std::invalid_argument("dinkelbach_maximize: eps must be positive");
  if (max_iter < 1) throw std::invalid_argument("dinkelbach_maximize: max_iter must be >= 1");
  DinkelbachResult<X> res;
  res.lambda = lambda0;
  for (int k = 0; k < max_iter; ++k) {
    X x = problem.parametric_argmax(res.lambda);
    const double f = problem.numerator(x);
    const double g = problem.denominator(x);
    if (!(g > 0.0))
      throw std::invalid_argument("dinkelbach_maximize: denominator must be positive");
    res.eta = f - res.lambda * g;
    res.lambda = f / g;
    res.x = std::move(x);
    res.iterations = k + 1;
    res.lambda_trace.push_back(res.lambda);
    if (res.eta < eps && res.lambda >= lambda_floor) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Real roots of c4 p^4 + c3 p^3 + c2 p^2 + c1 p + c0, ascending, deduplicated.

namespace detail {

inline double polyval(const std::vector<double>& c_desc, double x) {
  double v = 0.0;
  for (double c : c_desc) v = v * x + c;
  return v;
}

inline double polyder(const std::vector<double>& c_desc, double x) {
  const std::size_t n = c_desc.size();
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    v = v * x + c_desc[i] * static_cast<double>(n - 1 - i);
  return v;
}

}  // namespace detail

inline std::vector<double> quartic_real_roots(double c4, double c3, double c2,
                                              double c1, double c0) {
  std::vector<double> coef = {c4, c3, c2, c1, c0};
  const double max_abs =
      std::max({std::abs(c4), std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (max_abs == 0.0)
    throw std::invalid_argument("quartic_real_roots: all coefficients are zero");
  while (coef.size() > 1 && std::abs(coef.front()) <= 1e-14 * max_abs)
    coef.erase(coef.begin());
  const std::size_t deg = coef.size() - 1;
  if (deg == 0) return {};
  std::vector<double> raw;
  if (deg == 1) {
    raw.push_back(-coef[1] / coef[0]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
    for (std::size_t i = 1; i < deg; ++i)
      companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < deg; ++i)
      companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) =
          -coef[deg - i] / coef[0];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("quartic_real_roots: eigensolver failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const auto ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) <= 1e-6 * (1.0 + std::abs(ev.real())))
        raw.push_back(ev.real());
    }
  }
  const std::vector<double> orig = {c4, c3, c2, c1, c0};
  const double bound = 1e-9 * (1.0 + max_abs);
  std::vector<double> roots;
  for (double r : raw) {
    for (int it = 0; it < 6; ++it) {
      const double p = detail::polyval(orig, r);
      const double d = detail::polyder(orig, r);
      if (d == 0.0 || !std::isfinite(p / d)) break;
      const double step = p / d;
      if (std::abs(step) > 1.0 + std::abs(r)) break;
      r -= step;
    }
    if (std::abs(detail::polyval(orig, r)) <= bound) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (!out.empty() && std::abs(r - out.back()) <= 1e-7 * (1.0 + std::abs(r)))
      continue;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-scaling power profile
//   f(p) = log2(N1(p) / N2(p)) / (g1 p + g2),  p in [0, c],
// with quadratic N1, N2 > 0 and affine positive denominator.

struct PowerProfileCoeffs {
  std::array<std::array<double, 3>, 2> alpha{};  // [row][p^2, p, 1]
  std::array<double, 2> gamma{};                 // [p, 1]
  double c = 0.0;

  double num1(double p) const {
    return (alpha[0][0] * p + alpha[0][1]) * p + alpha[0][2];
  }
  double num2(double p) const {
    return (alpha[1][0] * p + alpha[1][1]) * p + alpha[1][2];
  }
  double den(double p) const { return gamma[0] * p + gamma[1]; }
  double value(double p) const { return std::log2(num1(p) / num2(p)) / den(p); }
};

struct PowerAllocation {
  double p = 0.0;
  double lambda = 0.0;
};

namespace detail {

// Extrema of a quadratic on [lo, hi] (vertex clamped into the interval).
inline std::pair<double, double> quad_range(double a, double b, double c2,
                                            double lo, double hi) {
  auto val = [&](double p) { return (a * p + b) * p + c2; };
  double mn = std::min(val(lo), val(hi));
  double mx = std::max(val(lo), val(hi));
  if (a != 0.0) {
    const double v = -b / (2.0 * a);
    if (v > lo && v < hi) {
      mn = std::min(mn, val(v));
      mx = std::max(mx, val(v));
    }
  }
  return {mn, mx};
}

}  // namespace detail

// Dinkelbach-style bisection on the level lambda. Feasibility of a level is
// decided from the real stationary points of the level equation plus the
// interval endpoints. Invariant to a common positive scaling of the two
// numerator rows.
inline PowerAllocation bisection_power_allocation(const PowerProfileCoeffs& pc,
                                                  double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("bisection_power_allocation: eps must be positive");
  if (pc.c < 0.0)
    throw std::invalid_argument("bisection_power_allocation: c must be nonnegative");
  const auto [n1_min, n1_max] =
      detail::quad_range(pc.alpha[0][0], pc.alpha[0][1], pc.alpha[0][2], 0.0, pc.c);
  const auto [n2_min, n2_max] =
      detail::quad_range(pc.alpha[1][0], pc.alpha[1][1], pc.alpha[1][2], 0.0, pc.c);
  const auto [d_min, d_max] =
      detail::quad_range(0.0, pc.gamma[0], pc.gamma[1], 0.0, pc.c);
  if (!(n1_min > 0.0) || !(n2_min > 0.0) || !(d_min > 0.0))
    throw std::invalid_argument(
        "bisection_power_allocation: numerator and denominator must stay positive on [0, c]");
  if (pc.gamma[0] < 0.0)
    throw std::invalid_argument("bisection_power_allocation: gamma[0] must be nonnegative");

  if (pc.c == 0.0) return {0.0, pc.value(0.0)};

  auto candidates_at = [&](double lambda) {
    const double ln = lambda * kLn2;
    const double g1 = pc.gamma[0];
    const double a11 = pc.alpha[0][0], a12 = pc.alpha[0][1], a13 = pc.alpha[0][2];
    const double a21 = pc.alpha[1][0], a22 = pc.alpha[1][1], a23 = pc.alpha[1][2];
    const double c4 = a11 * a21 * g1 * ln;
    const double c3 = (a12 * a21 + a11 * a22) * g1 * ln;
    const double c2 = (a13 * a21 + a12 * a22 + a11 * a23) * g1 * ln - a11 * a22 + a12 * a21;
    const double c1 = (a13 * a22 + a12 * a23) * g1 * ln + 2.0 * a13 * a21 - 2.0 * a11 * a23;
    const double c0 = a13 * a23 * g1 * ln - a12 * a23 + a13 * a22;
    std::vector<double> cand = {0.0, pc.c};
    if (std::max({std::abs(c4), std::abs(c3), std::abs(c2), std::abs(c1),
                  std::abs(c0)}) > 0.0) {
      for (double r : quartic_real_roots(c4, c3, c2, c1, c0)) {
        if (r >= -1e-12 && r <= pc.c + 1e-12)
          cand.push_back(std::clamp(r, 0.0, pc.c));
      }
    }
    return cand;
  };
  auto feasible = [&](double lambda) {
    for (double p : candidates_at(lambda))
      if (pc.value(p) >= lambda) return true;
    return false;
  };

  const double lam_lo = std::min(pc.value(0.0), pc.value(pc.c));
  const double log_hi = std::log2(n1_max / n2_min);
  double upper = log_hi > 0.0 ? log_hi / d_min : log_hi / d_max;
  // Mediant bound N1/N2 <= max_k alpha[0][k]/alpha[1][k]; only valid when all
  // coefficients are nonnegative so every term of both sums is nonnegative.
  bool nonneg_rows = true;
  for (const auto& row : pc.alpha)
    for (double v : row)
      if (v < 0.0) nonneg_rows = false;
  if (nonneg_rows) {
    const double ratio =
        std::max({pc.alpha[1][0] > 0.0
                      ? pc.alpha[0][0] / pc.alpha[1][0]
                      : (pc.alpha[0][0] > 0.0
                             ? std::numeric_limits<double>::infinity()
                             : 0.0),
                  pc.alpha[1][1] > 0.0
                      ? pc.alpha[0][1] / pc.alpha[1][1]
                      : (pc.alpha[0][1] > 0.0
                             ? std::numeric_limits<double>::infinity()
                             : 0.0),
                  pc.alpha[1][2] > 0.0
                      ? pc.alpha[0][2] / pc.alpha[1][2]
                      : (pc.alpha[0][2] > 0.0
                             ? std::numeric_limits<double>::infinity()
                             : 0.0)});
    if (ratio >= 1.0 && std::isfinite(ratio))
      upper = std::min(upper, std::log2(ratio) / pc.gamma[1]);
  }

  double a = lam_lo;
  double b = std::max(upper, lam_lo);
  for (int it = 0; it < 200 && (b - a) / 2.0 >= eps; ++it) {
    const double mid = 0.5 * (a + b);
    if (feasible(mid))
      a = mid;
    else
      b = mid;
  }

  double best_p = 0.0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (double p : candidates_at(a)) {
    const double v = pc.value(p);
    if (v > best_v + 1e-12 * (1.0 + std::abs(v)) ||
        (std::abs(v - best_v) <= 1e-12 * (1.0 + std::abs(v)) && p < best_p)) {
      best_v = v;
      best_p = p;
    }
  }
  return {best_p, best_v};
}

// ---------------------------------------------------------------------------
// Profile fitting: samples a callable p -> (num_b, num_e, den) on [0, c] and
// returns quadratic/affine coefficients when they reproduce the samples,
// otherwise the callable itself for direct search.

struct ProfileSample {
  double num_b = 0.0;
  double num_e = 0.0;
  double den = 0.0;
};

using ProfileFn = std::function<ProfileSample(double)>;

struct DirectProfile {
  ProfileFn profile;
  double c = 0.0;
};

inline std::variant<PowerProfileCoeffs, DirectProfile> fit_power_profile(
    const ProfileFn& profile, double c) {
  if (c < 0.0) throw std::invalid_argument("fit_power_profile: c must be nonnegative");
  if (c == 0.0) return DirectProfile{profile, c};
  constexpr int m = 9;
  Eigen::MatrixXd vq(m, 3), va(m, 2);
  Eigen::VectorXd y1(m), y2(m), yd(m);
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    const ProfileSample s = profile(t * c);
    vq(i, 0) = t * t;
    vq(i, 1) = t;
    vq(i, 2) = 1.0;
    va(i, 0) = t;
    va(i, 1) = 1.0;
    y1(i) = s.num_b;
    y2(i) = s.num_e;
    yd(i) = s.den;
  }
  const double num_scale = std::max(y1.cwiseAbs().maxCoeff(), y2.cwiseAbs().maxCoeff());
  const double den_scale = yd.cwiseAbs().maxCoeff();
  if (!(num_scale > 0.0) || !(den_scale > 0.0))
    return DirectProfile{profile, c};
  const Eigen::Vector3d b1 = vq.colPivHouseholderQr().solve(y1 / num_scale);
  const Eigen::Vector3d b2 = vq.colPivHouseholderQr().solve(y2 / num_scale);
  const Eigen::Vector2d bd = va.colPivHouseholderQr().solve(yd / den_scale);
  const double r1 = (vq * b1 - y1 / num_scale).cwiseAbs().maxCoeff();
  const double r2 = (vq * b2 - y2 / num_scale).cwiseAbs().maxCoeff();
  const double rd = (va * bd - yd / den_scale).cwiseAbs().maxCoeff();
  if (r1 > 1e-8 || r2 > 1e-8 || rd > 1e-8) return DirectProfile{profile, c};
  PowerProfileCoeffs pc;
  pc.alpha[0] = {b1(0) / (c * c), b1(1) / c, b1(2)};
  pc.alpha[1] = {b2(0) / (c * c), b2(1) / c, b2(2)};
  pc.gamma = {bd(0) * den_scale / c, bd(1) * den_scale};
  pc.c = c;
  return pc;
}

// ---------------------------------------------------------------------------
// Golden-section search (unimodal maximization on [lo, hi]).

inline double golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double tol,
                                      int max_iter = 200) {
  constexpr double inv_phi = 0.61803398874989484820458683436564;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Scalar allocation over a fitted or direct profile.
inline PowerAllocation allocate_power(
    const std::variant<PowerProfileCoeffs, DirectProfile>& prof, double eps) {
  if (std::holds_alternative<PowerProfileCoeffs>(prof))
    return bisection_power_allocation(std::get<PowerProfileCoeffs>(prof), eps);
  const auto& dp = std::get<DirectProfile>(prof);
  auto value = [&dp](double p) {
    const ProfileSample s = dp.profile(p);
    return std::log2(s.num_b / s.num_e) / s.den;
  };
  double best_p = 0.0;
  double best_v = value(0.0);
  auto consider = [&](double p) {
    const double v = value(p);
    if (v > best_v) {
      best_v = v;
      best_p = p;
    }
  };
  if (dp.c > 0.0) {
    consider(dp.c);
    constexpr int segments = 8;
    for (int k = 0; k < segments; ++k) {
      const double lo = dp.c * k / segments;
      const double hi = dp.c * (k + 1) / segments;
      consider(golden_section_maximize(value, lo, hi, 1e-10 * dp.c + 1e-300));
    }
  }
  return {best_p, best_v};
}

}  // namespace seemax
