#pragma once

#include "fractional.hpp"
#include "model.hpp"

#include <optional>

namespace seemax {

// Certificate that Y - P^H X Q - Q^H X^H P >= 0 for every X with ||X|| <= zeta.
// The norm-bounded family is replaced by a single block matrix in one scalar
// multiplier: the family is PSD for all admissible X iff some lambda >= 0 makes
//
//   [ Y - lambda Q^H Q   -zeta P^H ]
//   [    -zeta P          lambda I ]
//
// positive semidefinite.

struct PetersenInstance {
  cmat y;  // n x n Hermitian
  cmat p;  // r x n
  cmat q;  // r x n
  double zeta = 0.0;
};

inline cmat petersen_block(const PetersenInstance& in, double lambda) {
  const Eigen::Index n = in.y.rows();
  const Eigen::Index r = in.p.rows();
  cmat m = cmat::Zero(n + r, n + r);
  m.topLeftCorner(n, n) = in.y - lambda * (in.q.adjoint() * in.q);
  m.topRightCorner(n, r) = -in.zeta * in.p.adjoint();
  m.bottomLeftCorner(r, n) = -in.zeta * in.p;
  m.bottomRightCorner(r, r) = lambda * cmat::Identity(r, r);
  return hermitize(m);
}

// Searches for a multiplier certifying the robust inequality. The smallest
// eigenvalue of the block is concave in lambda, so a golden-section pass over
// [0, lambda_max] finds its maximizer; a fine grid is the fallback. Returns
// the multiplier on success, nothing when no certificate exists.
inline std::optional<double> petersen_certify(const PetersenInstance& in,
                                              double tol = 1e-9) {
  if (in.y.rows() != in.y.cols())
    throw std::invalid_argument("petersen_certify: Y must be square");
  if (in.p.cols() != in.y.rows() || in.q.cols() != in.y.rows() ||
      in.p.rows() != in.q.rows())
    throw std::invalid_argument("petersen_certify: P/Q shape mismatch");
  if (in.zeta < 0.0)
    throw std::invalid_argument("petersen_certify: zeta must be nonnegative");

  auto g = [&](double lambda) {
    return min_eigenvalue(petersen_block(in, lambda));
  };
  const double lambda_max =
      10.0 * (in.y.norm() + in.zeta * in.zeta * in.p.norm() * in.p.norm() + 1.0);
  const double accept = -1e-10;

  double best_l = 0.0;
  double best_g = g(0.0);
  const double at_max = g(lambda_max);
  if (at_max > best_g) {
    best_g = at_max;
    best_l = lambda_max;
  }
  const double gl = golden_section_maximize(g, 0.0, lambda_max, tol);
  const double gv = g(gl);
  if (gv > best_g) {
    best_g = gv;
    best_l = gl;
  }
  if (best_g >= accept) return best_l;

  for (int i = 0; i <= 10000; ++i) {
    const double l = lambda_max * static_cast<double>(i) / 10000.0;
    const double v = g(l);
    if (v >= accept) return l;
  }
  return std::nullopt;
}

}  // namespace seemax
