#include "sparse_pr/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sparse_pr/error.hpp"

namespace spr {

std::size_t Rng::below(std::size_t bound) {
  if (bound == 0) {
    throw InvalidParameter("Rng::below: bound must be positive");
  }
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t r = engine_();
  while (r >= limit) {
    r = engine_();
  }
  return static_cast<std::size_t>(r % b);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace spr
