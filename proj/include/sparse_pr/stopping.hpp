#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sparse_pr/rng.hpp"
#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/trajectory.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

/// l1 norm of the coordinates outside `support`.
double off_support_mass(const Vector& x, std::span<const std::size_t> support);

/// sqrt(n beta / ||x*||) ||x*||, the confinement level for off-support mass.
double off_support_bound(const SparseSignal& xstar, double beta);

/// Warm-up time T1 = first t > 0 with min_{i in S} |X_i^t| / |x*_i| > 1/2.
///
/// Feed it every iterate (e.g. from an IterateObserver) so that memory stays
/// bounded; t = 0 is never reported.
class WarmupTracker {
 public:
  explicit WarmupTracker(const SparseSignal& xstar);

  /// Returns true once the warm-up time has been reached.
  bool observe(std::size_t t, const Vector& x);
  std::optional<std::size_t> time() const noexcept { return time_; }

  /// min_{i in S} |x_i| / |x*_i|.
  double support_ratio(const Vector& x) const;

 private:
  const SparseSignal* xstar_;
  std::optional<std::size_t> time_;
};

/// Post-hoc warm-up time from recorded iterates; requires
/// `record_full_iterates`. Empty if the condition is never met.
std::optional<std::size_t> warmup_time(const Trajectory& trajectory, const SparseSignal& xstar);

struct OracleStop {
  std::size_t t_star = 0;
  double min_rel_error = 0.0;
};

/// argmin over recorded t >= 1 of dist(x*, X^t) / ||x*||, earliest on ties.
/// The t = 0 record is used only if it is the only record.
OracleStop oracle_stop(const Trajectory& trajectory, const SparseSignal& xstar);

struct HoldoutSplit {
  PhaselessDataset train;
  PhaselessDataset validation;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
};

/// Random row partition; train receives ceil(fraction * m) rows. Both parts
/// keep the original row order.
HoldoutSplit holdout_split(const PhaselessDataset& data, double fraction, Rng& rng);

struct HoldoutStop {
  std::size_t t_stop = 0;
  double holdout_risk = 0.0;
};

/// argmin over recorded t >= 1 of the hold-out risk, earliest on ties.
HoldoutStop holdout_stop(const Trajectory& trajectory);

/// Relative error dist / ||x*|| of the record at iteration t.
double relative_error_at(const Trajectory& trajectory, std::size_t t, const SparseSignal& xstar);

/// True if off_support_l1 <= off_support_bound at every record with t <= until.
bool off_support_confined(const Trajectory& trajectory, const SparseSignal& xstar, double beta,
                          std::size_t until);

/// Fraction of consecutive record pairs inside [from, to] along which dist_phi
/// does not increase. Returns 1 when the window holds fewer than two records.
double dist_phi_nonincreasing_fraction(const Trajectory& trajectory, std::size_t from, std::size_t to);

}  // namespace spr
