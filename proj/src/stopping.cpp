#include "sparse_pr/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sparse_pr/error.hpp"

namespace spr {

double off_support_mass(const Vector& x, std::span<const std::size_t> support) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<bool> on_support(n, false);
  for (std::size_t i : support) {
    if (i >= n) {
      throw InvalidParameter("off_support_mass: support index " + std::to_string(i) + " out of range");
    }
    on_support[i] = true;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_support[i]) total += std::abs(x[static_cast<Eigen::Index>(i)]);
  }
  return total;
}

double off_support_bound(const SparseSignal& xstar, double beta) {
  const double norm = xstar.norm2();
  if (!(norm > 0.0)) {
    throw InvalidParameter("off_support_bound: zero signal");
  }
  return std::sqrt(static_cast<double>(xstar.dim()) * beta / norm) * norm;
}

WarmupTracker::WarmupTracker(const SparseSignal& xstar) : xstar_(&xstar) {
  if (xstar.sparsity() == 0) {
    throw InvalidParameter("warmup: signal has empty support");
  }
}

double WarmupTracker::support_ratio(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != xstar_->dim()) {
    throw InvalidParameter("warmup: dimension mismatch");
  }
  double ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i : xstar_->support()) {
    const auto idx = static_cast<Eigen::Index>(i);
    ratio = std::min(ratio, std::abs(x[idx]) / std::abs(xstar_->values()[idx]));
  }
  return ratio;
}

bool WarmupTracker::observe(std::size_t t, const Vector& x) {
  if (!time_ && t > 0 && support_ratio(x) > 0.5) {
    time_ = t;
  }
  return time_.has_value();
}

std::optional<std::size_t> warmup_time(const Trajectory& trajectory, const SparseSignal& xstar) {
  WarmupTracker tracker(xstar);
  for (const auto& rec : trajectory.records) {
    if (!rec.iterate) {
      throw InvalidParameter("warmup_time: trajectory was recorded without iterates");
    }
    if (tracker.observe(rec.t, *rec.iterate)) {
      break;
    }
  }
  return tracker.time();
}

namespace {

template <typename Value>
const TrajectoryRecord* argmin_record(const Trajectory& trajectory, Value value, const char* what) {
  const TrajectoryRecord* best = nullptr;
  double best_value = 0.0;
  for (const auto& rec : trajectory.records) {
    const std::optional<double> v = value(rec);
    if (!v) {
      throw InvalidParameter(std::string(what) + ": record at t=" + std::to_string(rec.t) +
                             " lacks the required field");
    }
    if (rec.t == 0 && trajectory.records.size() > 1) {
      continue;
    }
    if (!best || *v < best_value) {
      best = &rec;
      best_value = *v;
    }
  }
  if (!best) {
    throw InvalidParameter(std::string(what) + ": empty trajectory");
  }
  return best;
}

}  // namespace

OracleStop oracle_stop(const Trajectory& trajectory, const SparseSignal& xstar) {
  if (!(xstar.norm2() > 0.0)) {
    throw InvalidParameter("oracle_stop: zero signal");
  }
  const auto* rec = argmin_record(trajectory, [](const TrajectoryRecord& r) { return r.dist; }, "oracle_stop");
  return OracleStop{rec->t, *rec->dist / xstar.norm2()};
}

HoldoutStop holdout_stop(const Trajectory& trajectory) {
  const auto* rec =
      argmin_record(trajectory, [](const TrajectoryRecord& r) { return r.holdout_risk; }, "holdout_stop");
  return HoldoutStop{rec->t, *rec->holdout_risk};
}

HoldoutSplit holdout_split(const PhaselessDataset& data, double fraction, Rng& rng) {
  const std::size_t m = data.rows();
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidParameter("holdout_split: fraction must lie in (0, 1)");
  }
  // The small offset keeps products such as 0.9 * 10 from rounding up.
  const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-9));
  if (n_train == 0 || n_train >= m) {
    throw InvalidParameter("holdout_split: fraction " + std::to_string(fraction) + " of " + std::to_string(m) +
                           " rows leaves an empty part");
  }
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = m - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> validation(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
  PhaselessDataset train_data = data.subset(train);
  PhaselessDataset validation_data = data.subset(validation);
  return HoldoutSplit{std::move(train_data), std::move(validation_data), std::move(train), std::move(validation)};
}

double relative_error_at(const Trajectory& trajectory, std::size_t t, const SparseSignal& xstar) {
  for (const auto& rec : trajectory.records) {
    if (rec.t == t) {
      if (!rec.dist) {
        throw InvalidParameter("relative_error_at: record lacks dist");
      }
      return *rec.dist / xstar.norm2();
    }
  }
  throw InvalidParameter("relative_error_at: no record at t=" + std::to_string(t));
}

bool off_support_confined(const Trajectory& trajectory, const SparseSignal& xstar, double beta, std::size_t until) {
  const double bound = off_support_bound(xstar, beta);
  for (const auto& rec : trajectory.records) {
    if (rec.t > until) break;
    if (!rec.off_support_l1) {
      throw InvalidParameter("off_support_confined: record lacks off_support_l1");
    }
    if (*rec.off_support_l1 > bound) return false;
  }
  return true;
}

double dist_phi_nonincreasing_fraction(const Trajectory& trajectory, std::size_t from, std::size_t to) {
  std::size_t pairs = 0;
  std::size_t good = 0;
  const TrajectoryRecord* prev = nullptr;
  for (const auto& rec : trajectory.records) {
    if (rec.t < from || rec.t > to) continue;
    if (!rec.dist_phi) {
      throw InvalidParameter("dist_phi_nonincreasing_fraction: record lacks dist_phi");
    }
    if (prev) {
      ++pairs;
      if (*rec.dist_phi <= *prev->dist_phi) ++good;
    }
    prev = &rec;
  }
  return pairs == 0 ? 1.0 : static_cast<double>(good) / static_cast<double>(pairs);
}

}  // namespace spr
