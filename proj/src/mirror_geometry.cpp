#include "sparse_pr/mirror_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "sparse_pr/error.hpp"

namespace spr {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kRoundingSlack = 1e-10;

void require_same_length(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidParameter(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::numeric_domain, std::string(what) + ": non-finite input");
  }
}

// 16-point Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre16 {
  std::array<double, 16> nodes{};
  std::array<double, 16> weights{};

  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = z;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      nodes[i] = 0.5 * (1.0 - z);
      weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);  // 2/((1-z^2)p'^2), halved for [0,1]
    }
  }
};

const GaussLegendre16& gauss_legendre() {
  static const GaussLegendre16 rule;
  return rule;
}

}  // namespace

HyperbolicMirrorMap::HyperbolicMirrorMap(double beta) : beta_(beta) {
  if (!(beta >= 1e-300) || !std::isfinite(beta)) {
    throw InvalidParameter("mirror map: beta must be finite and >= 1e-300");
  }
}

double stable_asinh(double z) noexcept {
  const double a = std::abs(z);
  double r;
  if (a > 1e8) {
    r = std::log(a) + kLn2;
  } else {
    r = std::log1p(a + a * a / (1.0 + std::sqrt(1.0 + a * a)));
  }
  return std::copysign(r, z);
}

namespace {

// asinh(x / beta) without forming an overflowing quotient.
double scaled_asinh(double x, double beta) noexcept {
  const double a = std::abs(x);
  if (a > beta * 1e8) {
    return std::copysign(std::log(a) - std::log(beta) + kLn2, x);
  }
  return stable_asinh(x / beta);
}

}  // namespace

double HyperbolicMirrorMap::gradient(double x) const noexcept { return scaled_asinh(x, beta_); }

double HyperbolicMirrorMap::inverse_gradient(double u) const noexcept {
  const double a = std::abs(u);
  if (a < 20.0) {
    return beta_ * std::sinh(u);
  }
  // e^{-|u|} is below double resolution relative to e^{|u|} here.
  return std::copysign(std::exp(a + std::log(beta_) - kLn2), u);
}

double phi(const Vector& x, const HyperbolicMirrorMap& map) {
  require_finite(x, "phi");
  const double beta = map.beta();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += x[i] * map.gradient(x[i]) - std::hypot(x[i], beta);
  }
  return total;
}

Vector grad_phi(const Vector& x, const HyperbolicMirrorMap& map) {
  require_finite(x, "grad_phi");
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g[i] = map.gradient(x[i]);
  }
  return g;
}

Vector grad_phi_inverse(const Vector& u, const HyperbolicMirrorMap& map) {
  require_finite(u, "grad_phi_inverse");
  Vector x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    x[i] = map.inverse_gradient(u[i]);
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::numeric_overflow, "grad_phi_inverse: beta*sinh(u) overflows at coordinate " +
                                                   std::to_string(i) + " (u=" + std::to_string(u[i]) + ")");
    }
  }
  return x;
}

double bregman_term(double x, double y, double beta) noexcept {
  const double h = y - x;
  if (h == 0.0) {
    return 0.0;
  }
  const double ry = std::hypot(y, beta);
  if (x == 0.0) {
    return y * y / (ry + beta);
  }
  const double rx = std::hypot(x, beta);
  if (std::abs(h) <= 0.5 * std::min(rx, ry)) {
    // The integrand s / r(x + s h) is analytic well beyond [0, 1] here: its
    // poles at +-i beta are at least min(rx, ry) away from the segment.
    const auto& gl = gauss_legendre();
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double s = gl.nodes[q];
      acc += gl.weights[q] * s / std::hypot(x + s * h, beta);
    }
    return h * h * acc;
  }
  return ry - rx - x * (scaled_asinh(y, beta) - scaled_asinh(x, beta));
}

double bregman(const Vector& x, const Vector& y, const HyperbolicMirrorMap& map) {
  require_same_length(x, y, "bregman");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += bregman_term(x[i], y[i], map.beta());
  }
  return total;
}

SignedDistance nearest_sign(const Vector& xstar, const Vector& x) {
  require_same_length(xstar, x, "dist");
  const double plus = (x - xstar).norm();
  const double minus = (x + xstar).norm();
  return minus < plus ? SignedDistance{minus, -1} : SignedDistance{plus, +1};
}

double dist_signset(const SparseSignal& xstar, const Vector& x) {
  return nearest_sign(xstar.values(), x).value;
}

double dist_phi_signset(const SparseSignal& xstar, const Vector& x, const HyperbolicMirrorMap& map) {
  require_same_length(xstar.values(), x, "dist_phi");
  const Vector neg = -xstar.values();
  return std::min(bregman(xstar.values(), x, map), bregman(neg, x, map));
}

SandwichCheck sandwich_bounds(const SparseSignal& xstar, const Vector& x, const HyperbolicMirrorMap& map) {
  const Vector& ref = xstar.values();
  require_same_length(ref, x, "sandwich_bounds");
  const double beta = map.beta();
  const double divergence = bregman(ref, x, map);

  SandwichCheck out;
  const double sq_err = (x - ref).squaredNorm();
  const double inf_x = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  const double inf_ref = xstar.max_abs();
  const double scale = std::sqrt(std::max(inf_x * inf_x, inf_ref * inf_ref) + beta * beta);
  const double lower_rhs = 2.0 * scale * divergence;
  out.slack_lower = lower_rhs - sq_err;
  out.lower_ok = sq_err <= lower_rhs * (1.0 + kRoundingSlack);

  bool applicable = true;
  for (Eigen::Index i = 0; i < x.size() && applicable; ++i) {
    applicable = x[i] * ref[i] >= 0.0 && std::abs(x[i]) >= 0.5 * std::abs(ref[i]);
  }
  out.upper_applicable = applicable;
  if (applicable) {
    double on_support = 0.0;
    double off_support = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (ref[i] != 0.0) {
        on_support += (x[i] - ref[i]) * (x[i] - ref[i]);
      } else {
        off_support += std::abs(x[i]);
      }
    }
    // sqrt(k) / (c ||x*||) with c = sqrt(k) x_min / ||x*|| reduces to 1 / x_min.
    const double support_term = xstar.sparsity() > 0 ? on_support / xstar.min_abs_nonzero() : 0.0;
    const double upper_rhs = support_term + off_support;
    out.slack_upper = upper_rhs - divergence;
    out.upper_ok = divergence <= upper_rhs * (1.0 + kRoundingSlack);
  }
  return out;
}

}  // namespace spr
