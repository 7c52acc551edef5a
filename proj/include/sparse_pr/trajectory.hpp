#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sparse_pr/types.hpp"

namespace spr {

struct SolverConfig {
  double beta = 1e-20;
  /// Step size; empty selects 0.3 / mean(Y)^{3/2}.
  std::optional<double> eta;
  std::size_t max_iters = 5000;
  std::size_t record_every = 1;
  bool record_full_iterates = false;

  /// Throws InvalidParameter on beta <= 0, eta <= 0, max_iters == 0 or
  /// record_every == 0.
  void validate() const;
};

/// Metrics of one recorded iterate X^t. Oracle fields are filled only when the
/// true signal was supplied to the run, `holdout_risk` only with a hold-out set.
struct TrajectoryRecord {
  std::size_t t = 0;
  double risk = 0.0;
  std::optional<double> dist;
  std::optional<double> dist_phi;
  std::optional<double> off_support_l1;
  std::optional<double> coherence;
  std::optional<int> coherence_sign;
  std::optional<double> holdout_risk;
  std::optional<Vector> iterate;
};

enum class RunStatus { completed, stopped_early, diverged };

const char* to_string(RunStatus status) noexcept;

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  /// Config as run, with `eta` resolved.
  SolverConfig config;
  std::size_t initial_coordinate = 0;
  RunStatus status = RunStatus::completed;
  /// Iteration at which the run diverged or stopped early.
  std::optional<std::size_t> terminated_at;
};

}  // namespace spr
