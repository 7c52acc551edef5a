#include "sparse_pr/sparse_pr.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <variant>

#include "sparse_pr/empirical_risk.hpp"
#include "sparse_pr/harness.hpp"
#include "sparse_pr/md_solver.hpp"
#include "sparse_pr/mirror_geometry.hpp"
#include "sparse_pr/report_io.hpp"
#include "sparse_pr/selftest.hpp"

struct spr_signal {
  spr::SparseSignal value;
};

struct spr_dataset {
  spr::PhaselessDataset value;
};

struct spr_trajectory {
  spr::Trajectory value;
  std::optional<spr::SparseSignal> signal;
  std::optional<std::size_t> t_warmup;
};

struct spr_report {
  std::variant<spr::SolveOutcome, spr::SweepResult, spr::CurvesResult> value;
  std::string figure;
  std::optional<spr_trajectory> solve_trajectory;
};

namespace {

thread_local std::string last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

spr_status map_code(spr::ErrorCode code) {
  switch (code) {
    case spr::ErrorCode::invalid_parameter: return SPR_INVALID_PARAMETER;
    case spr::ErrorCode::numeric_domain: return SPR_NUMERIC_DOMAIN;
    case spr::ErrorCode::numeric_overflow: return SPR_NUMERIC_OVERFLOW;
    case spr::ErrorCode::degenerate_data: return SPR_DEGENERATE_DATA;
    case spr::ErrorCode::diverged: return SPR_DIVERGED;
    case spr::ErrorCode::sweep_failure: return SPR_SWEEP_FAILURE;
    case spr::ErrorCode::io: return SPR_IO;
  }
  return SPR_INTERNAL;
}

spr_status fail(spr_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
spr_status guard(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const spr::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPR_INTERNAL, e.what());
  }
}

#define SPR_REQUIRE(cond, msg) \
  if (!(cond)) return fail(SPR_INVALID_PARAMETER, msg)

spr::Vector to_vector(const double* data, std::size_t n) {
  return Eigen::Map<const spr::Vector>(data, static_cast<Eigen::Index>(n));
}

spr::ProblemSpec to_problem(const spr_problem_params& p) {
  return spr::ProblemSpec{p.n, p.k, p.m, p.noise, p.noise_relative != 0, {}};
}

spr::SolverConfig to_solver(const spr_solver_config& c) {
  spr::SolverConfig out;
  out.beta = c.beta;
  if (c.eta > 0.0) out.eta = c.eta;
  out.max_iters = c.max_iters;
  out.record_every = c.record_every;
  return out;
}

double or_nan(const std::optional<double>& v) { return v ? *v : kNaN; }

std::ofstream open_output(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw spr::Error(spr::ErrorCode::io, std::string("cannot open '") + path + "' for writing");
  return out;
}

}  // namespace

extern "C" {

const char* spr_version(void) { return spr::software_version(); }

const char* spr_status_string(spr_status status) {
  switch (status) {
    case SPR_OK: return "ok";
    case SPR_INVALID_PARAMETER: return "invalid_parameter";
    case SPR_NUMERIC_DOMAIN: return "numeric_domain";
    case SPR_NUMERIC_OVERFLOW: return "numeric_overflow";
    case SPR_DEGENERATE_DATA: return "degenerate_data";
    case SPR_DIVERGED: return "diverged";
    case SPR_SWEEP_FAILURE: return "sweep_failure";
    case SPR_IO: return "io";
    case SPR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* spr_last_error(void) { return last_error.c_str(); }

spr_status spr_problem_generate(const spr_problem_params* params, uint64_t seed, spr_signal** signal,
                                spr_dataset** dataset) {
  return guard([&] {
    SPR_REQUIRE(params && signal && dataset, "spr_problem_generate: null argument");
    spr::Problem p = spr::generate_problem(to_problem(*params), seed);
    auto s = std::make_unique<spr_signal>(spr_signal{std::move(p.signal)});
    *dataset = new spr_dataset{std::move(p.data)};
    *signal = s.release();
    return SPR_OK;
  });
}

spr_status spr_signal_create(const double* values, size_t n, spr_signal** out) {
  return guard([&] {
    SPR_REQUIRE(out && (values || n == 0), "spr_signal_create: null argument");
    *out = new spr_signal{spr::SparseSignal(to_vector(values, n))};
    return SPR_OK;
  });
}

void spr_signal_free(spr_signal* signal) { delete signal; }
size_t spr_signal_dim(const spr_signal* signal) { return signal ? signal->value.dim() : 0; }
size_t spr_signal_sparsity(const spr_signal* signal) { return signal ? signal->value.sparsity() : 0; }
double spr_signal_norm(const spr_signal* signal) { return signal ? signal->value.norm2() : kNaN; }

spr_status spr_signal_values(const spr_signal* signal, double* out, size_t n) {
  return guard([&] {
    SPR_REQUIRE(signal && out, "spr_signal_values: null argument");
    SPR_REQUIRE(n == signal->value.dim(), "spr_signal_values: length mismatch");
    for (std::size_t i = 0; i < n; ++i) out[i] = signal->value.values()[static_cast<Eigen::Index>(i)];
    return SPR_OK;
  });
}

spr_status spr_dataset_create(const double* sensing, const double* observations, size_t m, size_t n, double sigma,
                              uint64_t seed, spr_dataset** out) {
  return guard([&] {
    SPR_REQUIRE(out && sensing && observations, "spr_dataset_create: null argument");
    spr::Matrix a = Eigen::Map<const spr::Matrix>(sensing, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    *out = new spr_dataset{spr::PhaselessDataset(std::move(a), to_vector(observations, m), sigma, seed)};
    return SPR_OK;
  });
}

void spr_dataset_free(spr_dataset* dataset) { delete dataset; }
size_t spr_dataset_rows(const spr_dataset* dataset) { return dataset ? dataset->value.rows() : 0; }
size_t spr_dataset_dim(const spr_dataset* dataset) { return dataset ? dataset->value.dim() : 0; }

spr_status spr_dataset_observations(const spr_dataset* dataset, double* out, size_t m) {
  return guard([&] {
    SPR_REQUIRE(dataset && out, "spr_dataset_observations: null argument");
    SPR_REQUIRE(m == dataset->value.rows(), "spr_dataset_observations: length mismatch");
    for (std::size_t i = 0; i < m; ++i) out[i] = dataset->value.observations()[static_cast<Eigen::Index>(i)];
    return SPR_OK;
  });
}

spr_status spr_dataset_read_csv(const char* path, spr_dataset** out) {
  return guard([&] {
    SPR_REQUIRE(path && out, "spr_dataset_read_csv: null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(SPR_IO, std::string("cannot open '") + path + "'");
    *out = new spr_dataset{spr::read_dataset_csv(in)};
    return SPR_OK;
  });
}

spr_status spr_dataset_write_csv(const spr_dataset* dataset, const char* path, int include_sensing) {
  return guard([&] {
    SPR_REQUIRE(dataset && path, "spr_dataset_write_csv: null argument");
    std::ofstream out = open_output(path);
    spr::write_dataset_csv(out, dataset->value, include_sensing != 0);
    return SPR_OK;
  });
}

spr_status spr_holdout_split(const spr_dataset* dataset, double fraction, uint64_t seed, spr_dataset** train,
                             spr_dataset** validation) {
  return guard([&] {
    SPR_REQUIRE(dataset && train && validation, "spr_holdout_split: null argument");
    spr::Rng rng(seed);
    spr::HoldoutSplit split = spr::holdout_split(dataset->value, fraction, rng);
    auto t = std::make_unique<spr_dataset>(spr_dataset{std::move(split.train)});
    *validation = new spr_dataset{std::move(split.validation)};
    *train = t.release();
    return SPR_OK;
  });
}

spr_status spr_risk(const spr_dataset* dataset, const double* x, size_t n, double* value, double* grad) {
  return guard([&] {
    SPR_REQUIRE(dataset && x && value, "spr_risk: null argument");
    SPR_REQUIRE(n == dataset->value.dim(), "spr_risk: dimension mismatch");
    const spr::RiskEvaluation r = spr::evaluate_risk(to_vector(x, n), dataset->value, grad != nullptr);
    *value = r.value;
    if (grad) {
      for (std::size_t i = 0; i < n; ++i) grad[i] = (*r.gradient)[static_cast<Eigen::Index>(i)];
    }
    return SPR_OK;
  });
}

spr_status spr_bregman(const double* x, const double* y, size_t n, double beta, double* out) {
  return guard([&] {
    SPR_REQUIRE(x && y && out, "spr_bregman: null argument");
    *out = spr::bregman(to_vector(x, n), to_vector(y, n), spr::HyperbolicMirrorMap(beta));
    return SPR_OK;
  });
}

spr_solver_config spr_solver_config_default(void) {
  const spr::SolverConfig d;
  return spr_solver_config{d.beta, 0.0, d.max_iters, d.record_every};
}

spr_status spr_solve(const spr_dataset* dataset, const spr_solver_config* config, const spr_signal* signal,
                     const spr_dataset* holdout, spr_trajectory** out) {
  return guard([&] {
    SPR_REQUIRE(dataset && config && out, "spr_solve: null argument");
    auto traj = std::make_unique<spr_trajectory>();
    if (signal) traj->signal = signal->value;
    std::optional<spr::WarmupTracker> tracker;
    spr::RunOptions options;
    if (traj->signal) {
      tracker.emplace(*traj->signal);
      options.xstar = &*traj->signal;
      options.observer = [&](std::size_t t, const spr::Vector& x) {
        tracker->observe(t, x);
        return true;
      };
    }
    options.holdout = holdout ? &holdout->value : nullptr;
    spr_status status = SPR_OK;
    try {
      traj->value = spr::run(dataset->value, to_solver(*config), options);
    } catch (const spr::DivergedError& e) {
      traj->value = e.partial();
      status = fail(SPR_DIVERGED, e.what());
    }
    if (tracker) traj->t_warmup = tracker->time();
    *out = traj.release();
    return status;
  });
}

void spr_trajectory_free(spr_trajectory* trajectory) { delete trajectory; }

size_t spr_trajectory_size(const spr_trajectory* trajectory) {
  return trajectory ? trajectory->value.records.size() : 0;
}

spr_status spr_trajectory_record(const spr_trajectory* trajectory, size_t index, spr_record* out) {
  return guard([&] {
    SPR_REQUIRE(trajectory && out, "spr_trajectory_record: null argument");
    SPR_REQUIRE(index < trajectory->value.records.size(), "spr_trajectory_record: index out of range");
    const spr::TrajectoryRecord& r = trajectory->value.records[index];
    *out = spr_record{r.t,
                      r.risk,
                      or_nan(r.dist),
                      or_nan(r.dist_phi),
                      or_nan(r.off_support_l1),
                      or_nan(r.coherence),
                      or_nan(r.holdout_risk)};
    return SPR_OK;
  });
}

spr_run_status spr_trajectory_status(const spr_trajectory* trajectory) {
  if (!trajectory) return SPR_RUN_DIVERGED;
  switch (trajectory->value.status) {
    case spr::RunStatus::completed: return SPR_RUN_COMPLETED;
    case spr::RunStatus::stopped_early: return SPR_RUN_STOPPED_EARLY;
    case spr::RunStatus::diverged: return SPR_RUN_DIVERGED;
  }
  return SPR_RUN_DIVERGED;
}

double spr_trajectory_eta(const spr_trajectory* trajectory) {
  return trajectory && trajectory->value.config.eta ? *trajectory->value.config.eta : kNaN;
}

size_t spr_trajectory_initial_coordinate(const spr_trajectory* trajectory) {
  return trajectory ? trajectory->value.initial_coordinate : 0;
}

spr_status spr_trajectory_warmup(const spr_trajectory* trajectory, size_t* t, int* reached) {
  return guard([&] {
    SPR_REQUIRE(trajectory && t && reached, "spr_trajectory_warmup: null argument");
    SPR_REQUIRE(trajectory->signal.has_value(), "spr_trajectory_warmup: run without a reference signal");
    *reached = trajectory->t_warmup ? 1 : 0;
    *t = trajectory->t_warmup.value_or(0);
    return SPR_OK;
  });
}

spr_status spr_trajectory_oracle_stop(const spr_trajectory* trajectory, size_t* t, double* rel_error) {
  return guard([&] {
    SPR_REQUIRE(trajectory && t && rel_error, "spr_trajectory_oracle_stop: null argument");
    SPR_REQUIRE(trajectory->signal.has_value(), "spr_trajectory_oracle_stop: run without a reference signal");
    const spr::OracleStop stop = spr::oracle_stop(trajectory->value, *trajectory->signal);
    *t = stop.t_star;
    *rel_error = stop.min_rel_error;
    return SPR_OK;
  });
}

spr_status spr_trajectory_holdout_stop(const spr_trajectory* trajectory, size_t* t, double* holdout_risk) {
  return guard([&] {
    SPR_REQUIRE(trajectory && t && holdout_risk, "spr_trajectory_holdout_stop: null argument");
    const spr::HoldoutStop stop = spr::holdout_stop(trajectory->value);
    *t = stop.t_stop;
    *holdout_risk = stop.holdout_risk;
    return SPR_OK;
  });
}

spr_status spr_trajectory_write_csv(const spr_trajectory* trajectory, const char* path) {
  return guard([&] {
    SPR_REQUIRE(trajectory && path, "spr_trajectory_write_csv: null argument");
    std::ofstream out = open_output(path);
    spr::write_trajectory_csv(out, trajectory->value);
    return SPR_OK;
  });
}

spr_sweep_spec spr_sweep_spec_default(void) {
  const spr::SweepSpec d;
  spr_sweep_spec s{};
  s.n = d.n;
  s.k = d.k;
  s.m = d.m;
  s.sigma_over_norm_sq = d.sigma_over_norm_sq;
  s.beta = d.beta;
  s.beta_relative_to_norm = 0;
  s.eta = 0.0;
  s.t_max = d.t_max;
  s.trials = d.trials;
  s.master_seed = d.master_seed;
  s.axis = SPR_AXIS_NOISE;
  s.values = nullptr;
  s.value_count = 0;
  s.metrics = SPR_METRIC_ORACLE;
  s.holdout_fraction = d.holdout_fraction;
  return s;
}

spr_figure_options spr_figure_options_default(void) { return spr_figure_options{1.0, 0, 0, 0}; }

spr_status spr_run_solve(const spr_solve_spec* spec, spr_report** out) {
  return guard([&] {
    SPR_REQUIRE(spec && out, "spr_run_solve: null argument");
    spr::SolveSpec s;
    s.problem = to_problem(spec->problem);
    s.solver = to_solver(spec->solver);
    s.seed = spec->seed;
    if (spec->holdout_fraction != 0.0) s.holdout_fraction = spec->holdout_fraction;
    auto report = std::make_unique<spr_report>(spr_report{spr::solve(s), {}, {}});
    const auto& outcome = std::get<spr::SolveOutcome>(report->value);
    report->solve_trajectory.emplace(spr_trajectory{outcome.trajectory, outcome.problem.signal, outcome.t_warmup});
    const bool diverged = outcome.trajectory.status == spr::RunStatus::diverged;
    const std::string message = outcome.message;
    *out = report.release();
    return diverged ? fail(SPR_DIVERGED, message) : SPR_OK;
  });
}

spr_status spr_run_sweep(const spr_sweep_spec* spec, size_t threads, spr_report** out) {
  return guard([&] {
    SPR_REQUIRE(spec && out, "spr_run_sweep: null argument");
    SPR_REQUIRE(spec->values || spec->value_count == 0, "spr_run_sweep: null value list");
    SPR_REQUIRE(spec->axis >= SPR_AXIS_NOISE && spec->axis <= SPR_AXIS_BETA, "spr_run_sweep: unknown axis");
    spr::SweepSpec s;
    s.n = spec->n;
    s.k = spec->k;
    s.m = spec->m;
    s.sigma_over_norm_sq = spec->sigma_over_norm_sq;
    s.beta = spec->beta;
    s.beta_relative_to_norm = spec->beta_relative_to_norm != 0;
    if (spec->eta > 0.0) s.eta = spec->eta;
    s.t_max = spec->t_max;
    s.trials = spec->trials;
    s.master_seed = spec->master_seed;
    s.axis = static_cast<spr::SweepAxis>(spec->axis);
    s.values.assign(spec->values, spec->values + spec->value_count);
    s.metrics = spr::SweepMetrics{(spec->metrics & SPR_METRIC_ORACLE) != 0, (spec->metrics & SPR_METRIC_HOLDOUT) != 0,
                                  (spec->metrics & SPR_METRIC_WARMUP) != 0};
    s.holdout_fraction = spec->holdout_fraction;
    *out = new spr_report{spr::run_sweep(s, threads), {}, {}};
    return SPR_OK;
  });
}

spr_status spr_run_figure(const char* name, const spr_figure_options* options, size_t threads, spr_report** out) {
  return guard([&] {
    SPR_REQUIRE(name && out, "spr_run_figure: null argument");
    const auto id = spr::parse_figure(name);
    SPR_REQUIRE(id.has_value(), std::string("unknown figure '") + name + "'");
    spr::FigureOptions fo;
    if (options) {
      fo.scale = options->scale;
      if (options->trials) fo.trials = options->trials;
      if (options->t_max) fo.t_max = options->t_max;
      fo.seed = options->seed;
    }
    if (*id == spr::FigureId::curves) {
      *out = new spr_report{spr::figure3_curves(fo, threads), name, {}};
    } else {
      *out = new spr_report{spr::run_sweep(spr::figure_spec(*id, fo), threads), name, {}};
    }
    return SPR_OK;
  });
}

void spr_report_free(spr_report* report) { delete report; }

spr_status spr_report_fit(const spr_report* report, double* slope, double* intercept, double* r_squared) {
  return guard([&] {
    SPR_REQUIRE(report && slope && intercept && r_squared, "spr_report_fit: null argument");
    const auto* sweep = std::get_if<spr::SweepResult>(&report->value);
    SPR_REQUIRE(sweep, "spr_report_fit: not a sweep report");
    const auto& f = sweep->fits;
    const auto& fit = f.oracle ? f.oracle : (f.holdout ? f.holdout : f.warmup);
    if (!fit) return fail(SPR_DEGENERATE_DATA, "spr_report_fit: not enough points for a fit");
    *slope = fit->slope;
    *intercept = fit->intercept;
    *r_squared = fit->r_squared;
    return SPR_OK;
  });
}

spr_status spr_report_spearman(const spr_report* report, double* rho) {
  return guard([&] {
    SPR_REQUIRE(report && rho, "spr_report_spearman: null argument");
    const auto* sweep = std::get_if<spr::SweepResult>(&report->value);
    SPR_REQUIRE(sweep, "spr_report_spearman: not a sweep report");
    if (!sweep->fits.warmup_spearman) return fail(SPR_DEGENERATE_DATA, "spr_report_spearman: no warm-up fit");
    *rho = *sweep->fits.warmup_spearman;
    return SPR_OK;
  });
}

size_t spr_report_point_count(const spr_report* report) {
  if (!report) return 0;
  const auto* sweep = std::get_if<spr::SweepResult>(&report->value);
  return sweep ? sweep->points.size() : 0;
}

spr_status spr_report_point(const spr_report* report, size_t index, spr_sweep_point* out) {
  return guard([&] {
    SPR_REQUIRE(report && out, "spr_report_point: null argument");
    const auto* sweep = std::get_if<spr::SweepResult>(&report->value);
    SPR_REQUIRE(sweep, "spr_report_point: not a sweep report");
    SPR_REQUIRE(index < sweep->points.size(), "spr_report_point: index out of range");
    const spr::SweepPoint& p = sweep->points[index];
    auto mean = [](const std::optional<spr::Moments>& m) { return m && m->count ? m->mean : kNaN; };
    auto sd = [](const std::optional<spr::Moments>& m) { return m && m->count ? m->stddev : kNaN; };
    *out = spr_sweep_point{p.axis_value,    p.trials,       p.successes,    p.failures,
                           mean(p.oracle),  sd(p.oracle),   mean(p.holdout), sd(p.holdout),
                           mean(p.warmup),  sd(p.warmup),   p.used_in_fit ? 1 : 0};
    return SPR_OK;
  });
}

spr_status spr_report_trajectory(const spr_report* report, const spr_trajectory** out) {
  return guard([&] {
    SPR_REQUIRE(report && out, "spr_report_trajectory: null argument");
    SPR_REQUIRE(report->solve_trajectory.has_value(), "spr_report_trajectory: not a solve report");
    *out = &*report->solve_trajectory;
    return SPR_OK;
  });
}

spr_status spr_report_write_csv(const spr_report* report, const char* path) {
  return guard([&] {
    SPR_REQUIRE(report && path, "spr_report_write_csv: null argument");
    std::ofstream out = open_output(path);
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, spr::SolveOutcome>) {
            spr::write_trajectory_csv(out, r.trajectory);
          } else if constexpr (std::is_same_v<T, spr::SweepResult>) {
            spr::write_sweep_csv(out, r);
          } else {
            spr::write_curves_csv(out, r);
          }
        },
        report->value);
    return SPR_OK;
  });
}

spr_status spr_report_write_json(const spr_report* report, const char* path) {
  return guard([&] {
    SPR_REQUIRE(report && path, "spr_report_write_json: null argument");
    std::ofstream out = open_output(path);
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, spr::SolveOutcome>) {
            spr::write_solve_json(out, r);
          } else if constexpr (std::is_same_v<T, spr::SweepResult>) {
            spr::write_sweep_json(out, r, report->figure);
          } else {
            spr::write_curves_json(out, r);
          }
        },
        report->value);
    return SPR_OK;
  });
}

spr_status spr_write_error_json(const char* path, const char* code, const char* message) {
  return guard([&] {
    SPR_REQUIRE(path && code && message, "spr_write_error_json: null argument");
    if (std::string_view(path) == "-") {
      spr::write_error_json(std::cout, code, message);
      std::cout.flush();
    } else {
      std::ofstream out = open_output(path);
      spr::write_error_json(out, code, message);
    }
    return SPR_OK;
  });
}

spr_status spr_selftest(uint64_t seed, spr_check_callback callback, void* user, int* all_passed) {
  return guard([&] {
    SPR_REQUIRE(all_passed, "spr_selftest: null argument");
    bool ok = true;
    for (const auto& c : spr::run_selftest(seed)) {
      ok = ok && c.passed;
      if (callback) callback(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
    }
    *all_passed = ok ? 1 : 0;
    return SPR_OK;
  });
}

}  // extern "C"
