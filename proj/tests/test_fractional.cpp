#include "seemax/fractional.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <variant>
#include <vector>

using namespace seemax;

namespace {

// Scalar fractional problem over [0, p_max] with a golden-section oracle for
// the parametric subproblem.
FractionalProblem<double> scalar_problem(const oracle::ScalarFractional& sf) {
  FractionalProblem<double> prob;
  prob.numerator = [sf](const double& p) { return sf.num(p); };
  prob.denominator = [sf](const double& p) { return sf.den(p); };
  prob.parametric_argmax = [sf](double lambda) {
    auto h = [&](double p) { return sf.num(p) - lambda * sf.den(p); };
    return golden_section_maximize(h, 0.0, sf.p_max, 1e-11 * sf.p_max);
  };
  return prob;
}

}  // namespace

TEST_CASE("ratio maximization by Dinkelbach iteration") {
  SECTION("zero numerator gives a zero ratio") {
    FractionalProblem<double> prob;
    prob.numerator = [](const double&) { return 0.0; };
    prob.denominator = [](const double&) { return 1.0; };
    prob.parametric_argmax = [](double) { return 0.0; };
    const auto res = dinkelbach_maximize(prob, 1e-10, 50);
    REQUIRE(res.converged);
    REQUIRE(res.lambda == 0.0);
  }

  SECTION("log over affine has the analytic optimum") {
    FractionalProblem<double> prob;
    prob.numerator = [](const double& p) { return std::log1p(p); };
    prob.denominator = [](const double& p) { return 1.0 + p; };
    prob.parametric_argmax = [](double lambda) {
      if (lambda <= 0.0) return 10.0;
      return std::clamp(1.0 / lambda - 1.0, 0.0, 10.0);
    };
    const auto res = dinkelbach_maximize(prob, 1e-12, 100);
    REQUIRE(res.converged);
    REQUIRE(std::abs(res.lambda - 1.0 / std::numbers::e) <= 1e-6);
    REQUIRE(std::abs(res.x - (std::numbers::e - 1.0)) <= 1e-6);
  }

  SECTION("quadratic over affine matches a dense grid") {
    oracle::ScalarFractional sf;
    sf.a = 0.0;
    sf.b = 1.0;
    sf.c = 0.0;
    sf.d = 0.0;
    sf.p_max = 10.0;
    FractionalProblem<double> prob;
    prob.numerator = [](const double& p) { return -(p - 3.0) * (p - 3.0) + 10.0; };
    prob.denominator = [](const double& p) { return p + 2.0; };
    prob.parametric_argmax = [&prob](double lambda) {
      auto h = [&](double p) {
        return prob.numerator(p) - lambda * prob.denominator(p);
      };
      return golden_section_maximize(h, 0.0, 10.0, 1e-11);
    };
    const auto res = dinkelbach_maximize(prob, 1e-12, 100);
    REQUIRE(res.converged);
    auto ratio = [&](double p) { return prob.numerator(p) / prob.denominator(p); };
    const auto [p_grid, v_grid] = oracle::grid_max_1d(ratio, 0.0, 10.0, 1000001);
    REQUIRE(std::abs(res.x - p_grid) <= 1e-4);
    REQUIRE(std::abs(res.lambda - v_grid) <= 1e-4);

    // The level sequence never decreases and the auxiliary residual shrinks
    // strictly while the level still moves.
    for (std::size_t k = 1; k < res.lambda_trace.size(); ++k)
      REQUIRE(res.lambda_trace[k] >= res.lambda_trace[k - 1] - 1e-12);
    std::vector<double> eta;
    for (double lam : res.lambda_trace) {
      const double x = prob.parametric_argmax(lam);
      eta.push_back(prob.numerator(x) - lam * prob.denominator(x));
    }
    for (std::size_t k = 1; k < eta.size(); ++k) {
      REQUIRE(eta[k] <= eta[k - 1] + 1e-12);
      if (res.lambda_trace[k] > res.lambda_trace[k - 1] + 1e-9)
        REQUIRE(eta[k] < eta[k - 1]);
    }
  }

  SECTION("random smooth programs match their grids") {
    Rng rng(411);
    for (int trial = 0; trial < 30; ++trial) {
      const auto sf = oracle::random_scalar_fractional(rng);
      const auto prob = scalar_problem(sf);
      const auto res = dinkelbach_maximize(prob, 1e-12, 200);
      REQUIRE(res.converged);
      auto ratio = [&](double p) { return sf.ratio(p); };
      const auto [p_grid, v_grid] =
          oracle::grid_max_1d(ratio, 0.0, sf.p_max, 200001);
      REQUIRE(std::abs(res.lambda - v_grid) <=
              std::max(1e-5, 1e-4 * std::abs(v_grid)));
      for (std::size_t k = 1; k < res.lambda_trace.size(); ++k)
        REQUIRE(res.lambda_trace[k] >= res.lambda_trace[k - 1] - 1e-12);
    }
  }

  SECTION("iteration cap returns best-so-far unconverged") {
    oracle::ScalarFractional sf;
    const auto prob = scalar_problem(sf);
    const auto res = dinkelbach_maximize(prob, 1e-14, 1);
    REQUIRE_FALSE(res.converged);
    REQUIRE(res.iterations == 1);
  }

  SECTION("argument validation") {
    oracle::ScalarFractional sf;
    const auto prob = scalar_problem(sf);
    REQUIRE_THROWS_AS(dinkelbach_maximize(prob, 0.0, 10), std::invalid_argument);
    REQUIRE_THROWS_AS(dinkelbach_maximize(prob, 1e-8, 0), std::invalid_argument);
    FractionalProblem<double> bad = prob;
    bad.denominator = [](const double&) { return 0.0; };
    REQUIRE_THROWS_AS(dinkelbach_maximize(bad, 1e-8, 10), std::invalid_argument);
  }
}

TEST_CASE("real roots of low-degree polynomials") {
  SECTION("four simple roots") {
    // (p-1)(p-2)(p-3)(p-4)
    const auto roots = quartic_real_roots(1.0, -10.0, 35.0, -50.0, 24.0);
    REQUIRE(roots.size() == 4);
    for (int k = 0; k < 4; ++k)
      REQUIRE(std::abs(roots[static_cast<std::size_t>(k)] - (k + 1)) <= 1e-7);
  }

  SECTION("repeated root collapses") {
    const auto roots = quartic_real_roots(1.0, 0.0, 0.0, 0.0, 0.0);
    REQUIRE(roots.size() == 1);
    REQUIRE(roots[0] == 0.0);
  }

  SECTION("no real roots") {
    REQUIRE(quartic_real_roots(1.0, 0.0, 0.0, 0.0, 1.0).empty());
  }

  SECTION("degree reduction on vanishing leading coefficients") {
    // (p-1)(p-2)(p-3)
    const auto cubic = quartic_real_roots(0.0, 1.0, -6.0, 11.0, -6.0);
    REQUIRE(cubic.size() == 3);
    for (int k = 0; k < 3; ++k)
      REQUIRE(std::abs(cubic[static_cast<std::size_t>(k)] - (k + 1)) <= 1e-7);
    const auto linear = quartic_real_roots(0.0, 0.0, 0.0, 2.0, -4.0);
    REQUIRE(linear.size() == 1);
    REQUIRE(std::abs(linear[0] - 2.0) <= 1e-12);
    REQUIRE(quartic_real_roots(0.0, 0.0, 0.0, 0.0, 5.0).empty());
    REQUIRE_THROWS_AS(quartic_real_roots(0.0, 0.0, 0.0, 0.0, 0.0),
                      std::invalid_argument);
  }

  SECTION("every root has a small residual") {
    Rng rng(412);
    for (int trial = 0; trial < 100; ++trial) {
      std::array<double, 5> c;
      for (double& v : c) v = -2.0 + 4.0 * rng.uniform();
      const double max_abs = std::max({std::abs(c[0]), std::abs(c[1]),
                                       std::abs(c[2]), std::abs(c[3]),
                                       std::abs(c[4])});
      const auto roots = quartic_real_roots(c[0], c[1], c[2], c[3], c[4]);
      for (double r : roots) {
        const double poly = (((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4];
        REQUIRE(std::abs(poly) <= 1e-9 * (1.0 + max_abs));
      }
    }
  }
}

TEST_CASE("power allocation over a two-quadratic log ratio") {
  SECTION("identical numerator rows give zero at zero power") {
    PowerProfileCoeffs pc;
    pc.alpha[0] = {0.1, 0.4, 1.0};
    pc.alpha[1] = {0.1, 0.4, 1.0};
    pc.gamma = {0.5, 1.0};
    pc.c = 3.0;
    const auto res = bisection_power_allocation(pc, 1e-9);
    REQUIRE(res.lambda == 0.0);
    REQUIRE(res.p == 0.0);
  }

  SECTION("random valid coefficients match a dense grid") {
    Rng rng(413);
    for (int trial = 0; trial < 30; ++trial) {
      const auto pc = oracle::random_profile_coeffs(rng);
      const auto res = bisection_power_allocation(pc, 1e-9);
      auto f = [&](double p) { return pc.value(p); };
      const auto [p_grid, v_grid] = oracle::grid_max_1d(f, 0.0, pc.c, 200001);
      REQUIRE(std::abs(res.lambda - v_grid) <=
              std::max(1e-5, 1e-4 * std::abs(v_grid)));
      REQUIRE(res.lambda == pc.value(res.p));
    }
  }

  SECTION("constant denominator reduces to the log-ratio argmax") {
    PowerProfileCoeffs pc;
    pc.alpha[0] = {-0.2, 1.0, 1.0};
    pc.alpha[1] = {0.1, 0.0, 1.0};
    pc.gamma = {0.0, 2.0};
    pc.c = 4.0;
    const auto res = bisection_power_allocation(pc, 1e-10);
    auto logratio = [&](double p) { return std::log2(pc.num1(p) / pc.num2(p)); };
    const auto [p_grid, v_grid] = oracle::grid_max_1d(logratio, 0.0, pc.c, 1000001);
    REQUIRE(std::abs(res.p - p_grid) <= 2e-4);
    REQUIRE(std::abs(res.lambda - v_grid / 2.0) <= 1e-9);
  }

  SECTION("objective never exceeds the printed upper bound") {
    Rng rng(414);
    for (int trial = 0; trial < 30; ++trial) {
      const auto pc = oracle::random_profile_coeffs(rng);
      const double bound = oracle::lambda_max_bound(pc);
      for (int k = 0; k < 1000; ++k) {
        const double p = pc.c * rng.uniform();
        REQUIRE(pc.value(p) <= bound + 1e-12);
      }
    }
  }

  SECTION("invariant to a common positive row scaling") {
    Rng rng(415);
    for (double t : {0.5, 7.25}) {
      const auto pc = oracle::random_profile_coeffs(rng);
      PowerProfileCoeffs scaled = pc;
      for (auto& row : scaled.alpha)
        for (double& v : row) v *= t;
      const auto base = bisection_power_allocation(pc, 1e-10);
      const auto same = bisection_power_allocation(scaled, 1e-10);
      REQUIRE(std::abs(same.p - base.p) <= 1e-9 * (1.0 + std::abs(base.p)));
      REQUIRE(std::abs(same.lambda - base.lambda) <=
              1e-9 * (1.0 + std::abs(base.lambda)));
    }
  }

  SECTION("zero cap evaluates at zero") {
    PowerProfileCoeffs pc;
    pc.alpha[0] = {0.0, 0.0, 2.0};
    pc.alpha[1] = {0.0, 0.0, 1.0};
    pc.gamma = {0.0, 0.5};
    pc.c = 0.0;
    const auto res = bisection_power_allocation(pc, 1e-9);
    REQUIRE(res.p == 0.0);
    REQUIRE(std::abs(res.lambda - 2.0) <= 1e-12);
  }

  SECTION("invariant violations are rejected") {
    PowerProfileCoeffs pc;
    pc.alpha[0] = {1.0, -10.0, 1.0};
    pc.alpha[1] = {0.0, 0.0, 1.0};
    pc.gamma = {0.1, 1.0};
    pc.c = 5.0;
    REQUIRE_THROWS_AS(bisection_power_allocation(pc, 1e-9), std::invalid_argument);
    pc.alpha[0] = {0.0, 0.0, 1.0};
    REQUIRE_THROWS_AS(bisection_power_allocation(pc, 0.0), std::invalid_argument);
  }
}

TEST_CASE("profile fitting with direct-search fallback") {
  SECTION("quadratic ratios are recovered exactly") {
    // Scalar links: each determinant ratio is a product of affine factors.
    auto profile = [](double p) {
      ProfileSample s;
      s.num_b = (1.0 + 2.02 * p) * (1.0 + 0.3 * p);
      s.num_e = (1.0 + 0.02 * p) * (1.0 + 0.8 * p);
      s.den = 0.1 + p / 0.9;
      return s;
    };
    const auto fit = fit_power_profile(profile, 2.0);
    REQUIRE(std::holds_alternative<PowerProfileCoeffs>(fit));
    const auto& pc = std::get<PowerProfileCoeffs>(fit);
    REQUIRE(pc.c == 2.0);
    Rng rng(416);
    for (int k = 0; k < 37; ++k) {
      const double p = 2.0 * rng.uniform();
      const ProfileSample s = profile(p);
      const double want = std::log2(s.num_b / s.num_e) / s.den;
      REQUIRE(std::abs(pc.value(p) - want) <= 1e-12 * (1.0 + std::abs(want)));
      REQUIRE(std::abs(pc.den(p) - s.den) <= 1e-12 * (1.0 + s.den));
    }
  }

  SECTION("rank-2 two-antenna determinants trigger the fallback") {
    // The product of the Bob and Eve determinants is quartic in p for a
    // rank-2 covariance over 2x2 channels, so no quadratic fit exists.
    Rng rng(417);
    const cmat h = oracle::random_complex(rng, 2, 2, 1.0);
    const cmat g = oracle::random_complex(rng, 2, 2, 0.6);
    const cmat q = cmat::Identity(2, 2) * 0.5;
    auto profile = [&](double p) {
      ProfileSample s;
      const cmat eye = cmat::Identity(2, 2);
      const cmat sig_e = eye + 0.2 * p * (g * g.adjoint());
      s.num_b = (eye + p * h * q * h.adjoint()).determinant().real() *
                sig_e.determinant().real();
      s.num_e = (sig_e + p * g * q * g.adjoint()).determinant().real();
      s.den = 0.5 + 0.3 * p;
      return s;
    };
    const auto fit = fit_power_profile(profile, 5.0);
    REQUIRE(std::holds_alternative<DirectProfile>(fit));
    const auto res = allocate_power(fit, 1e-10);
    auto value = [&](double p) {
      const ProfileSample s = profile(p);
      return std::log2(s.num_b / s.num_e) / s.den;
    };
    const auto [p_grid, v_grid] = oracle::grid_max_1d(value, 0.0, 5.0, 200001);
    REQUIRE(std::abs(res.lambda - v_grid) <=
            std::max(1e-4, 1e-4 * std::abs(v_grid)));
  }

  SECTION("flat ratio allocates zero power") {
    auto profile = [](double p) {
      ProfileSample s;
      s.num_b = 1.0 + 0.2 * p + 0.03 * p * p;
      s.num_e = s.num_b;
      s.den = 0.2 + 0.4 * p;
      return s;
    };
    const auto fit = fit_power_profile(profile, 3.0);
    REQUIRE(std::holds_alternative<PowerProfileCoeffs>(fit));
    const auto res = allocate_power(fit, 1e-9);
    REQUIRE(res.p == 0.0);
    REQUIRE(std::abs(res.lambda) <= 1e-9);
  }
}

TEST_CASE("golden-section maximization") {
  auto f = [](double p) { return -(p - 2.0) * (p - 2.0); };
  REQUIRE(std::abs(golden_section_maximize(f, 0.0, 5.0, 1e-10) - 2.0) <= 1e-8);
  auto inc = [](double p) { return p; };
  REQUIRE(golden_section_maximize(inc, 0.0, 1.0, 1e-10) >= 1.0 - 1e-8);
}
