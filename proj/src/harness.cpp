#include "sparse_pr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "sparse_pr/error.hpp"
#include "sparse_pr/md_solver.hpp"
#include "sparse_pr/rng.hpp"
#include "sparse_pr/signal_model.hpp"

namespace spr {

// ---------------------------------------------------------------------------
// Fitting

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidParameter("linear_fit: xs and ys differ in length");
  }
  if (xs.size() < 2) {
    throw InvalidParameter("linear_fit: need at least 2 points");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n;
  const double my = pairwise_sum(ys) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw InvalidParameter("linear_fit: x values are all equal");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

LinearFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidParameter("loglog_slope: xs and ys differ in length");
  }
  if (xs.size() < 3) {
    throw InvalidParameter("loglog_slope: need at least 3 points");
  }
  std::vector<double> lx(xs.size());
  std::vector<double> ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InvalidParameter("loglog_slope: all values must be positive and finite");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  return linear_fit(lx, ly);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InvalidParameter("spearman: need two equally long samples of size >= 2");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) {
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Sweep spec

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::noise: return "noise";
    case SweepAxis::samples: return "samples";
    case SweepAxis::sparsity: return "sparsity";
    case SweepAxis::beta: return "beta";
  }
  return "unknown";
}

std::optional<SweepAxis> parse_axis(std::string_view name) noexcept {
  if (name == "noise") return SweepAxis::noise;
  if (name == "samples" || name == "m") return SweepAxis::samples;
  if (name == "sparsity" || name == "k") return SweepAxis::sparsity;
  if (name == "beta") return SweepAxis::beta;
  return std::nullopt;
}

const char* to_string(TrialStatus status) noexcept {
  switch (status) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::diverged: return "diverged";
    case TrialStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

bool is_count(double v) { return v >= 1.0 && v == std::floor(v) && v < 1e15; }

}  // namespace

void SweepSpec::validate() const {
  if (trials == 0) throw InvalidParameter("sweep: trials must be >= 1");
  if (t_max == 0) throw InvalidParameter("sweep: t_max must be >= 1");
  if (values.empty()) throw InvalidParameter("sweep: the swept axis needs at least one value");
  if (!metrics.oracle && !metrics.holdout && !metrics.warmup) {
    throw InvalidParameter("sweep: no metric selected");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw InvalidParameter("sweep: holdout fraction must lie in (0, 1)");
  }
  if (eta && !(*eta > 0.0)) throw InvalidParameter("sweep: eta must be > 0");
  if (!(beta > 0.0)) throw InvalidParameter("sweep: beta must be > 0");
  if (!(sigma_over_norm_sq >= 0.0)) throw InvalidParameter("sweep: noise level must be >= 0");
  for (double v : values) {
    switch (axis) {
      case SweepAxis::noise:
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("sweep: noise values must be >= 0");
        break;
      case SweepAxis::beta:
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter("sweep: beta values must be > 0");
        break;
      case SweepAxis::samples:
      case SweepAxis::sparsity:
        if (!is_count(v)) throw InvalidParameter("sweep: sample and sparsity values must be positive integers");
        break;
    }
  }
  const std::size_t max_k =
      axis == SweepAxis::sparsity ? static_cast<std::size_t>(*std::max_element(values.begin(), values.end())) : k;
  if (max_k == 0 || max_k > n) throw InvalidParameter("sweep: need 1 <= k <= n");
  if (axis != SweepAxis::samples && m == 0) throw InvalidParameter("sweep: m must be >= 1");
}

std::uint64_t trial_seed(const SweepSpec& spec, std::size_t axis_index, std::size_t trial) {
  return derive_seed(spec.master_seed, axis_index, trial);
}

// ---------------------------------------------------------------------------
// Trials

namespace {

constexpr std::uint64_t kHoldoutStream = 0x686f6c646f7574ULL;  // "holdout"

struct TrialParameters {
  ProblemSpec problem;
  double beta;
};

TrialParameters trial_parameters(const SweepSpec& spec, double value) {
  TrialParameters p{ProblemSpec{spec.n, spec.k, spec.m, spec.sigma_over_norm_sq, true, {}}, spec.beta};
  switch (spec.axis) {
    case SweepAxis::noise: p.problem.noise = value; break;
    case SweepAxis::samples: p.problem.m = static_cast<std::size_t>(value); break;
    case SweepAxis::sparsity: p.problem.k = static_cast<std::size_t>(value); break;
    case SweepAxis::beta: p.beta = value; break;
  }
  return p;
}

}  // namespace

TrialOutcome run_trial(const SweepSpec& spec, std::size_t axis_index, std::size_t trial) {
  TrialOutcome out;
  out.axis_index = axis_index;
  out.axis_value = spec.values.at(axis_index);
  out.trial = trial;
  out.seed = trial_seed(spec, axis_index, trial);
  try {
    const TrialParameters params = trial_parameters(spec, out.axis_value);
    const Problem problem = generate_problem(params.problem, out.seed);
    const SparseSignal& xstar = problem.signal;

    SolverConfig config;
    config.beta = spec.beta_relative_to_norm ? params.beta * xstar.norm2() : params.beta;
    config.eta = spec.eta;
    config.max_iters = spec.t_max;
    config.record_every = 1;

    if (spec.metrics.oracle || spec.metrics.warmup) {
      WarmupTracker tracker(xstar);
      const bool warmup_only = !spec.metrics.oracle && !spec.metrics.holdout;
      RunOptions options;
      options.xstar = &xstar;
      options.observer = [&](std::size_t t, const Vector& x) {
        const bool reached = tracker.observe(t, x);
        return !(warmup_only && reached);
      };
      const Trajectory traj = run(problem.data, config, options);
      out.t_warmup = tracker.time();
      if (spec.metrics.oracle) {
        const OracleStop stop = oracle_stop(traj, xstar);
        out.oracle_error = stop.min_rel_error;
        out.t_stop_oracle = stop.t_star;
      }
    }
    if (spec.metrics.holdout) {
      Rng split_rng(derive_seed(out.seed, kHoldoutStream, 0));
      const HoldoutSplit split = holdout_split(problem.data, spec.holdout_fraction, split_rng);
      RunOptions options;
      options.xstar = &xstar;
      options.holdout = &split.validation;
      const Trajectory traj = run(split.train, config, options);
      const HoldoutStop stop = holdout_stop(traj);
      out.t_stop_holdout = stop.t_stop;
      out.holdout_error = relative_error_at(traj, stop.t_stop, xstar);
    }
  } catch (const DivergedError& e) {
    out.status = TrialStatus::diverged;
    out.message = e.what();
  } catch (const Error& e) {
    out.status = TrialStatus::failed;
    out.message = e.what();
  }
  return out;
}

namespace {

void run_parallel(std::size_t tasks, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min(threads, tasks);
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
}

Moments moments_of(const std::vector<double>& values) {
  Moments out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
    out.stddev = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  }
  return out;
}

constexpr double kMaxFailureFraction = 0.2;

}  // namespace

SweepResult summarize_sweep(const SweepSpec& spec, std::vector<TrialOutcome> outcomes) {
  SweepResult result;
  result.spec = spec;
  result.trials = std::move(outcomes);

  for (std::size_t j = 0; j < spec.values.size(); ++j) {
    SweepPoint pt;
    pt.axis_value = spec.values[j];
    std::vector<double> oracle;
    std::vector<double> holdout;
    std::vector<double> warmup;
    for (const auto& t : result.trials) {
      if (t.axis_index != j) continue;
      ++pt.trials;
      if (t.status != TrialStatus::ok) {
        ++pt.failures;
        continue;
      }
      ++pt.successes;
      if (t.oracle_error) oracle.push_back(*t.oracle_error);
      if (t.holdout_error) holdout.push_back(*t.holdout_error);
      if (spec.metrics.warmup || spec.metrics.oracle) {
        if (t.t_warmup) {
          warmup.push_back(static_cast<double>(*t.t_warmup));
        } else {
          ++pt.warmup_not_reached;
        }
      }
    }
    if (pt.successes == 0) {
      throw Error(ErrorCode::sweep_failure, "sweep: all " + std::to_string(pt.trials) + " trials failed at " +
                                                to_string(spec.axis) + "=" + std::to_string(pt.axis_value));
    }
    if (spec.metrics.oracle) pt.oracle = moments_of(oracle);
    if (spec.metrics.holdout) pt.holdout = moments_of(holdout);
    if (spec.metrics.oracle || spec.metrics.warmup) pt.warmup = moments_of(warmup);
    if (static_cast<double>(pt.failures) > kMaxFailureFraction * static_cast<double>(pt.trials)) {
      pt.used_in_fit = false;
      result.warnings.push_back("excluded " + std::string(to_string(spec.axis)) + "=" + std::to_string(pt.axis_value) +
                                " from fits: " + std::to_string(pt.failures) + " of " + std::to_string(pt.trials) +
                                " trials failed");
    }
    result.points.push_back(pt);
  }

  auto axis_x = [&](const SweepPoint& p) {
    return spec.axis == SweepAxis::beta ? std::log(1.0 / p.axis_value) : p.axis_value;
  };
  auto fit_errors = [&](auto member) -> std::optional<LinearFit> {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : result.points) {
      const std::optional<Moments>& m = p.*member;
      if (!p.used_in_fit || !m || m->count == 0) continue;
      xs.push_back(p.axis_value);
      ys.push_back(m->mean);
    }
    try {
      if (spec.axis == SweepAxis::noise) {
        if (xs.size() >= 2) return linear_fit(xs, ys);
      } else if (xs.size() >= 3) {
        return loglog_slope(xs, ys);
      }
    } catch (const InvalidParameter& e) {
      result.warnings.push_back(std::string("error fit skipped: ") + e.what());
    }
    return std::nullopt;
  };
  if (spec.metrics.oracle) result.fits.oracle = fit_errors(&SweepPoint::oracle);
  if (spec.metrics.holdout) result.fits.holdout = fit_errors(&SweepPoint::holdout);

  if (spec.metrics.warmup) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : result.points) {
      if (!p.used_in_fit || !p.warmup || p.warmup->count == 0) continue;
      if (static_cast<double>(p.warmup_not_reached) > kMaxFailureFraction * static_cast<double>(p.successes)) {
        result.warnings.push_back("excluded " + std::string(to_string(spec.axis)) + "=" +
                                  std::to_string(p.axis_value) + " from the warm-up fit: T1 not reached in " +
                                  std::to_string(p.warmup_not_reached) + " runs");
        continue;
      }
      xs.push_back(axis_x(p));
      ys.push_back(p.warmup->mean);
    }
    if (xs.size() >= 2) {
      try {
        result.fits.warmup = linear_fit(xs, ys);
        result.fits.warmup_spearman = spearman(xs, ys);
      } catch (const InvalidParameter& e) {
        result.warnings.push_back(std::string("warm-up fit skipped: ") + e.what());
      }
    }
  }
  return result;
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t threads) {
  spec.validate();
  const std::size_t total = spec.values.size() * spec.trials;
  std::vector<TrialOutcome> outcomes(total);
  run_parallel(total, threads, [&](std::size_t task) {
    outcomes[task] = run_trial(spec, task / spec.trials, task % spec.trials);
  });
  return summarize_sweep(spec, std::move(outcomes));
}

// ---------------------------------------------------------------------------
// Single runs

SolveOutcome solve(const SolveSpec& spec) {
  spec.solver.validate();
  SolveOutcome out{spec, generate_problem(spec.problem, spec.seed), {}, {}, {}, {}, {}, {}};
  const SparseSignal& xstar = out.problem.signal;
  std::optional<HoldoutSplit> split;
  if (spec.holdout_fraction) {
    Rng split_rng(derive_seed(spec.seed, kHoldoutStream, 0));
    split.emplace(holdout_split(out.problem.data, *spec.holdout_fraction, split_rng));
  }
  WarmupTracker tracker(xstar);
  RunOptions options;
  options.xstar = &xstar;
  options.holdout = split ? &split->validation : nullptr;
  options.observer = [&](std::size_t t, const Vector& x) {
    tracker.observe(t, x);
    return true;
  };
  try {
    out.trajectory = run(split ? split->train : out.problem.data, spec.solver, options);
  } catch (const DivergedError& e) {
    out.trajectory = e.partial();
    out.message = e.what();
  }
  out.t_warmup = tracker.time();
  if (!out.trajectory.records.empty()) {
    out.oracle = oracle_stop(out.trajectory, xstar);
    if (split) {
      out.holdout = holdout_stop(out.trajectory);
      out.holdout_rel_error = relative_error_at(out.trajectory, out.holdout->t_stop, xstar);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure presets

std::optional<FigureId> parse_figure(std::string_view name) noexcept {
  if (name == "1-left") return FigureId::noise;
  if (name == "1-center") return FigureId::samples;
  if (name == "1-right") return FigureId::sparsity;
  if (name == "2-beta") return FigureId::warmup_beta;
  if (name == "2-k") return FigureId::warmup_sparsity;
  if (name == "3") return FigureId::curves;
  return std::nullopt;
}

const char* figure_name(FigureId id) noexcept {
  switch (id) {
    case FigureId::noise: return "1-left";
    case FigureId::samples: return "1-center";
    case FigureId::sparsity: return "1-right";
    case FigureId::warmup_beta: return "2-beta";
    case FigureId::warmup_sparsity: return "2-k";
    case FigureId::curves: return "3";
  }
  return "unknown";
}

namespace {

void check_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidParameter("figure: scale must be > 0");
  }
}

std::size_t scaled(std::size_t value, double scale, std::size_t floor_value = 1) {
  const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(value) * scale));
  return std::max(s, floor_value);
}

}  // namespace

SweepSpec figure_spec(FigureId id, const FigureOptions& options) {
  check_scale(options.scale);
  SweepSpec spec;
  spec.beta = 1e-20;
  spec.t_max = 5000;
  spec.trials = 100;
  spec.sigma_over_norm_sq = 0.1;
  spec.metrics = SweepMetrics{true, true, false};
  switch (id) {
    case FigureId::noise:
      spec.n = 2000;
      spec.m = 2000;
      spec.k = 10;
      spec.axis = SweepAxis::noise;
      spec.values = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
      break;
    case FigureId::samples:
      spec.n = 2000;
      spec.k = 10;
      spec.m = 0;
      spec.axis = SweepAxis::samples;
      spec.values = {1500, 2000, 2500, 3000, 3500, 4000, 4500, 5000};
      break;
    case FigureId::sparsity:
      spec.n = 2000;
      spec.m = 4000;
      spec.k = 0;
      spec.axis = SweepAxis::sparsity;
      spec.values = {5, 10, 15, 20, 25};
      break;
    case FigureId::warmup_beta:
      spec.n = 2000;
      spec.m = 1500;
      spec.k = 10;
      spec.axis = SweepAxis::beta;
      spec.beta_relative_to_norm = true;
      spec.values = {1e-4, 1e-8, 1e-12, 1e-16, 1e-20, 1e-24, 1e-28, 1e-32, 1e-36, 1e-40};
      spec.metrics = SweepMetrics{false, false, true};
      break;
    case FigureId::warmup_sparsity:
      spec.n = 2000;
      spec.m = 4000;
      spec.k = 0;
      spec.axis = SweepAxis::sparsity;
      spec.values = {5, 10, 15, 20, 25};
      spec.metrics = SweepMetrics{false, false, true};
      break;
    case FigureId::curves:
      throw InvalidParameter("figure 3 produces curves, not a sweep; use figure3_spec");
  }
  spec.master_seed = options.seed;

  const std::size_t max_k = spec.axis == SweepAxis::sparsity
                                ? static_cast<std::size_t>(*std::max_element(spec.values.begin(), spec.values.end()))
                                : spec.k;
  spec.n = scaled(spec.n, options.scale, max_k);
  if (spec.axis == SweepAxis::samples) {
    for (double& v : spec.values) v = static_cast<double>(scaled(static_cast<std::size_t>(v), options.scale));
  } else {
    spec.m = scaled(spec.m, options.scale);
  }
  spec.trials = options.trials ? *options.trials : scaled(spec.trials, options.scale);
  if (options.t_max) spec.t_max = *options.t_max;
  if (spec.axis == SweepAxis::sparsity) spec.k = static_cast<std::size_t>(spec.values.front());
  return spec;
}

SweepResult figure1_left(const FigureOptions& options, std::size_t threads) {
  return run_sweep(figure_spec(FigureId::noise, options), threads);
}
SweepResult figure1_center(const FigureOptions& options, std::size_t threads) {
  return run_sweep(figure_spec(FigureId::samples, options), threads);
}
SweepResult figure1_right(const FigureOptions& options, std::size_t threads) {
  return run_sweep(figure_spec(FigureId::sparsity, options), threads);
}
SweepResult figure2_warmup_beta(const FigureOptions& options, std::size_t threads) {
  return run_sweep(figure_spec(FigureId::warmup_beta, options), threads);
}
SweepResult figure2_warmup_k(const FigureOptions& options, std::size_t threads) {
  return run_sweep(figure_spec(FigureId::warmup_sparsity, options), threads);
}

CurvesSpec figure3_spec(const FigureOptions& options) {
  check_scale(options.scale);
  CurvesSpec spec;
  spec.n = scaled(spec.n, options.scale, spec.k);
  spec.seed = options.seed;
  if (options.t_max) spec.t_max = *options.t_max;
  return spec;
}

CurvesResult run_curves(const CurvesSpec& spec, std::size_t threads) {
  if (spec.betas.empty() || spec.noise_levels.empty()) {
    throw InvalidParameter("curves: need at least one beta and one noise level");
  }
  if (spec.t_max == 0 || spec.record_every == 0) {
    throw InvalidParameter("curves: t_max and record_every must be >= 1");
  }
  CurvesResult result;
  result.spec = spec;
  result.curves.resize(spec.betas.size() * spec.noise_levels.size());
  const std::size_t per_noise = spec.betas.size();
  run_parallel(result.curves.size(), threads, [&](std::size_t task) {
    Curve& curve = result.curves[task];
    curve.sigma_over_norm_sq = spec.noise_levels[task / per_noise];
    curve.beta = spec.betas[task % per_noise];
    try {
      // Same seed for every curve: x* and A are shared, only the noise scale differs.
      const Problem problem =
          generate_problem(ProblemSpec{spec.n, spec.k, spec.m, curve.sigma_over_norm_sq, true, {}}, spec.seed);
      curve.signal_norm = problem.signal.norm2();
      SolverConfig config;
      config.beta = curve.beta;
      config.max_iters = spec.t_max;
      config.record_every = spec.record_every;
      WarmupTracker tracker(problem.signal);
      RunOptions options;
      options.xstar = &problem.signal;
      options.observer = [&](std::size_t t, const Vector& x) {
        tracker.observe(t, x);
        return true;
      };
      curve.trajectory = run(problem.data, config, options);
      curve.t_warmup = tracker.time();
      curve.oracle = oracle_stop(curve.trajectory, problem.signal);
    } catch (const DivergedError& e) {
      curve.trajectory = e.partial();
      curve.message = e.what();
    } catch (const Error& e) {
      curve.message = e.what();
    }
  });
  return result;
}

CurvesResult figure3_curves(const FigureOptions& options, std::size_t threads) {
  return run_curves(figure3_spec(options), threads);
}

}  // namespace spr
