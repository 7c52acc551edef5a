#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using GradientFn = std::function<Vector(const Vector&, const PhaselessDataset&)>;

/// grad against a five-point central difference of the risk at `points`
/// random points (n = 15, m = 40). `gradient` defaults to grad_risk.
CheckResult check_risk_gradient(std::uint64_t seed, std::size_t points = 50, const GradientFn& gradient = {});
/// grad Phi against a central difference of Phi, and the inverse map round trip.
CheckResult check_mirror_gradient(std::uint64_t seed);
/// Dual-domain mirror descent and EG+- fed the same gradients, 200 steps.
CheckResult check_eg_equivalence(std::uint64_t seed, std::size_t steps = 200);
/// Per-step three-point identity of the Bregman divergence along a short run.
CheckResult check_bregman_identity(std::uint64_t seed, std::size_t steps = 200);
/// Stable coordinate-wise divergence against the definition in extended precision.
CheckResult check_bregman_forms(std::uint64_t seed);
/// Quadratic sandwich around D_Phi(x*, x) on random applicable pairs.
CheckResult check_sandwich(std::uint64_t seed, std::size_t pairs = 2000);
/// Dataset CSV write/read round trip with and without the sensing block.
CheckResult check_dataset_round_trip(std::uint64_t seed);
/// Closed-form population gradient against a finite difference of the
/// population risk.
CheckResult check_population_gradient(std::uint64_t seed);

std::vector<CheckResult> run_selftest(std::uint64_t seed = 0);

}  // namespace spr
