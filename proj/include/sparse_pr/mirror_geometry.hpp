#pragma once

#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

/// Hyperbolic entropy potential
///   Phi(x) = sum_i x_i asinh(x_i / beta) - sqrt(x_i^2 + beta^2).
/// Small beta makes the geometry l1-like near the origin; large beta l2-like.
class HyperbolicMirrorMap {
 public:
  explicit HyperbolicMirrorMap(double beta);

  double beta() const noexcept { return beta_; }

  /// asinh(x / beta), without forming x / beta when it would overflow.
  double gradient(double x) const noexcept;
  /// beta * sinh(u). Returns +-inf when the result is not representable.
  double inverse_gradient(double u) const noexcept;

 private:
  double beta_;
};

/// asinh with a log1p branch near zero and an asymptotic branch for large |z|.
double stable_asinh(double z) noexcept;

double phi(const Vector& x, const HyperbolicMirrorMap& map);
Vector grad_phi(const Vector& x, const HyperbolicMirrorMap& map);
/// Throws ErrorCode::numeric_overflow naming the first coordinate that overflows.
Vector grad_phi_inverse(const Vector& u, const HyperbolicMirrorMap& map);

/// D_Phi(x, y) = Phi(x) - Phi(y) - grad Phi(y)^T (x - y), with x the reference
/// point. Evaluated coordinate-wise as
///   sqrt(y_i^2+beta^2) - sqrt(x_i^2+beta^2) - x_i [asinh(y_i/beta) - asinh(x_i/beta)],
/// switching to a quadrature of h^2 int_0^1 s / sqrt((x_i + s h)^2 + beta^2) ds
/// (h = y_i - x_i) when the two points are close, where the closed form cancels.
double bregman(const Vector& x, const Vector& y, const HyperbolicMirrorMap& map);
double bregman_term(double x, double y, double beta) noexcept;

struct SignedDistance {
  double value;
  /// +1 if measured against x*, -1 if against -x*. Ties resolve to +1.
  int sign;
};

/// min(||x - x*||_2, ||x + x*||_2) together with the minimizing sign.
SignedDistance nearest_sign(const Vector& xstar, const Vector& x);
double dist_signset(const SparseSignal& xstar, const Vector& x);
/// min(D_Phi(x*, x), D_Phi(-x*, x)).
double dist_phi_signset(const SparseSignal& xstar, const Vector& x, const HyperbolicMirrorMap& map);

struct SandwichCheck {
  bool lower_ok = false;
  bool upper_applicable = false;
  bool upper_ok = false;
  /// rhs - lhs of the universal lower bound.
  double slack_lower = 0.0;
  /// rhs - lhs of the sign-consistent upper bound; 0 when not applicable.
  double slack_upper = 0.0;
};

/// Checks the quadratic sandwich around D_Phi(x*, x):
///   ||x - x*||^2 <= 2 sqrt(max(||x||_inf^2, ||x*||_inf^2) + beta^2) D_Phi(x*, x)
/// always, and, when x_i x*_i >= 0 and |x_i| >= |x*_i| / 2 for every i,
///   D_Phi(x*, x) <= sqrt(k) / (c ||x*||) ||x_S - x*_S||^2 + ||x_{S^c}||_1
/// with c = sqrt(k) x_min / ||x*||, the largest admissible constant.
/// Both comparisons allow a relative rounding slack of 1e-10.
SandwichCheck sandwich_bounds(const SparseSignal& xstar, const Vector& x, const HyperbolicMirrorMap& map);

}  // namespace spr
