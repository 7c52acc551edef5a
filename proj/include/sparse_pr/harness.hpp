#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/stopping.hpp"
#include "sparse_pr/trajectory.hpp"

namespace spr {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 points and
/// non-constant x. R^2 is 1 when y is fitted exactly (including constant y).
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);
/// Least squares on (log x, log y). Needs >= 3 points, all positive.
LinearFit loglog_slope(std::span<const double> xs, std::span<const double> ys);
/// Rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);
/// Pairwise (cascade) summation; result depends only on the element order.
double pairwise_sum(std::span<const double> values);

enum class SweepAxis { noise, samples, sparsity, beta };

const char* to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_axis(std::string_view name) noexcept;

struct SweepMetrics {
  /// min_t dist(x*, X^t)/||x*|| over the full-data run.
  bool oracle = true;
  /// Error at the hold-out stopping time of a second run on the training split.
  bool holdout = false;
  /// Warm-up time T1. Tracked for free during the oracle run; a warm-up-only
  /// sweep stops each run as soon as T1 is reached.
  bool warmup = false;
};

/// One Monte Carlo sweep: every parameter fixed except `axis`, which takes
/// each entry of `values` in turn.
struct SweepSpec {
  std::size_t n = 2000;
  std::size_t k = 10;
  std::size_t m = 2000;
  double sigma_over_norm_sq = 0.1;
  double beta = 1e-20;
  /// Interpret beta (fixed or swept) as beta / ||x*||_2 for each trial.
  bool beta_relative_to_norm = false;
  /// Empty: 0.3 / mean(Y)^{3/2} per trial.
  std::optional<double> eta;
  std::size_t t_max = 5000;
  std::size_t trials = 100;
  std::uint64_t master_seed = 0;
  SweepAxis axis = SweepAxis::noise;
  std::vector<double> values;
  SweepMetrics metrics;
  double holdout_fraction = 0.9;

  void validate() const;
};

enum class TrialStatus { ok, diverged, failed };

const char* to_string(TrialStatus status) noexcept;

struct TrialOutcome {
  std::size_t axis_index = 0;
  double axis_value = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> oracle_error;
  std::optional<double> holdout_error;
  std::optional<std::size_t> t_warmup;
  std::optional<std::size_t> t_stop_oracle;
  std::optional<std::size_t> t_stop_holdout;
  TrialStatus status = TrialStatus::ok;
  std::string message;
};

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct SweepPoint {
  double axis_value = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::optional<Moments> oracle;
  std::optional<Moments> holdout;
  std::optional<Moments> warmup;
  /// Successful trials whose run ended before T1 was reached.
  std::size_t warmup_not_reached = 0;
  bool used_in_fit = true;
};

struct SweepFits {
  /// Error fits: linear in sigma for the noise axis, log-log otherwise.
  std::optional<LinearFit> oracle;
  std::optional<LinearFit> holdout;
  /// T1 fit: against log(1/beta) for the beta axis, linear in the axis otherwise.
  std::optional<LinearFit> warmup;
  std::optional<double> warmup_spearman;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;
  std::vector<TrialOutcome> trials;
  SweepFits fits;
  std::vector<std::string> warnings;
};

/// Seed of trial i at axis index j: derive_seed(master_seed, j, i).
std::uint64_t trial_seed(const SweepSpec& spec, std::size_t axis_index, std::size_t trial);

/// Runs one (signal, dataset) draw of the sweep. Never throws for run-time
/// failures; they are reported in the outcome status.
TrialOutcome run_trial(const SweepSpec& spec, std::size_t axis_index, std::size_t trial);

/// Runs all trials on up to `threads` workers (0 = hardware concurrency).
/// The result is identical for every thread count. Throws ErrorCode::sweep_failure
/// if every trial at some axis value failed.
SweepResult run_sweep(const SweepSpec& spec, std::size_t threads = 1);

/// Aggregation and fitting over already computed outcomes (in trial order).
SweepResult summarize_sweep(const SweepSpec& spec, std::vector<TrialOutcome> outcomes);

// ---------------------------------------------------------------------------
// Single runs

struct SolveSpec {
  ProblemSpec problem;
  SolverConfig solver;
  std::uint64_t seed = 0;
  /// Train on this fraction of the rows and stop on the rest.
  std::optional<double> holdout_fraction;
};

struct SolveOutcome {
  SolveSpec spec;
  Problem problem;
  Trajectory trajectory;
  std::optional<std::size_t> t_warmup;
  std::optional<OracleStop> oracle;
  std::optional<HoldoutStop> holdout;
  std::optional<double> holdout_rel_error;
  /// Divergence message; the trajectory then holds the records before it.
  std::string message;
};

/// Generates the problem from `seed`, runs the solver with every oracle metric
/// and applies the stopping rules. Divergence is reported in the outcome, other
/// errors are thrown.
SolveOutcome solve(const SolveSpec& spec);

// ---------------------------------------------------------------------------
// Figure presets

enum class FigureId { noise, samples, sparsity, warmup_beta, warmup_sparsity, curves };

/// "1-left", "1-center", "1-right", "2-beta", "2-k", "3".
std::optional<FigureId> parse_figure(std::string_view name) noexcept;
const char* figure_name(FigureId id) noexcept;

struct FigureOptions {
  /// Shrinks n, m (fixed and swept) and the trial count; k, beta and the noise
  /// level are never scaled. For figure 3 only n is scaled.
  double scale = 1.0;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> t_max;
  std::uint64_t seed = 0;
};

/// Sweep preset for figures 1 and 2 after scaling. Throws for FigureId::curves.
SweepSpec figure_spec(FigureId id, const FigureOptions& options);

SweepResult figure1_left(const FigureOptions& options, std::size_t threads = 1);
SweepResult figure1_center(const FigureOptions& options, std::size_t threads = 1);
SweepResult figure1_right(const FigureOptions& options, std::size_t threads = 1);
SweepResult figure2_warmup_beta(const FigureOptions& options, std::size_t threads = 1);
SweepResult figure2_warmup_k(const FigureOptions& options, std::size_t threads = 1);

struct CurvesSpec {
  std::size_t n = 50000;
  std::size_t m = 1000;
  std::size_t k = 10;
  std::vector<double> betas{1e-6, 1e-8, 1e-10, 1e-12, 1e-14};
  std::vector<double> noise_levels{0.0, 0.5};
  std::size_t t_max = 5000;
  std::size_t record_every = 10;
  std::uint64_t seed = 0;
};

struct Curve {
  double beta = 0.0;
  double sigma_over_norm_sq = 0.0;
  Trajectory trajectory;
  double signal_norm = 0.0;
  std::optional<std::size_t> t_warmup;
  std::optional<OracleStop> oracle;
  std::string message;
};

struct CurvesResult {
  CurvesSpec spec;
  std::vector<Curve> curves;
};

CurvesSpec figure3_spec(const FigureOptions& options);
/// One draw of x* and A per noise level (shared across beta), one run per beta.
CurvesResult run_curves(const CurvesSpec& spec, std::size_t threads = 1);
CurvesResult figure3_curves(const FigureOptions& options, std::size_t threads = 1);

}  // namespace spr
