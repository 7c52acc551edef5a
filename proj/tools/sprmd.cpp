// sprmd: mirror descent for sparse phase retrieval from the command line.
//
//   sprmd solve --n 500 --m 800 --k 5 --sigma 0 --beta 1e-12 --iters 3000 --seed 7
//   sprmd sweep --axis samples --values 400,600,900 --n 500 --k 5 --trials 20
//   sprmd figure --name 1-center --scale 0.25 --trials 20
//   sprmd selftest
//
// Outputs go to --out, or to $SPRMD_OUT_DIR when --out is not given, or to the
// working directory. Exit codes: 0 success, 1 run-time failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparse_pr/sparse_pr.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

fs::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("SPRMD_OUT_DIR"); env && *env) return env;
  return ".";
}

int report_failure(const fs::path& dir, spr_status status) {
  const std::string message = spr_last_error();
  std::cerr << "sprmd: " << spr_status_string(status) << ": " << message << '\n';
  std::error_code ec;
  fs::create_directories(dir, ec);
  spr_write_error_json((dir / "error.json").c_str(), spr_status_string(status), message.c_str());
  spr_write_error_json("-", spr_status_string(status), message.c_str());
  return status == SPR_INVALID_PARAMETER ? kExitUsage : kExitRuntime;
}

bool prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    std::cerr << "sprmd: cannot create output directory " << dir << '\n';
    return false;
  }
  return true;
}

int write_report(const spr_report* report, const fs::path& dir, const std::string& stem) {
  const fs::path csv = dir / (stem + ".csv");
  const fs::path json = dir / (stem + ".json");
  spr_status s = spr_report_write_csv(report, csv.c_str());
  if (s == SPR_OK) s = spr_report_write_json(report, json.c_str());
  if (s != SPR_OK) return report_failure(dir, s);
  std::cout << csv.string() << '\n' << json.string() << '\n';
  return 0;
}

void add_common(CLI::App* cmd, Common& c, bool threads) {
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  if (threads) {
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-stopped mirror descent for sparse phase retrieval"};
  app.set_version_flag("--version", std::string(spr_version()));
  app.require_subcommand(1);

  Common common;

  // solve
  spr_solve_spec solve_spec{};
  solve_spec.solver = spr_solver_config_default();
  solve_spec.problem.noise = 0.1;
  bool sigma_absolute = false;
  std::optional<double> solve_eta;
  std::optional<double> solve_holdout;
  auto* solve = app.add_subcommand("solve", "Run mirror descent on one generated problem");
  solve->add_option("--n", solve_spec.problem.n, "Dimension")->required()->check(CLI::PositiveNumber);
  solve->add_option("--m", solve_spec.problem.m, "Measurements")->required()->check(CLI::PositiveNumber);
  solve->add_option("--k", solve_spec.problem.k, "Sparsity")->required()->check(CLI::PositiveNumber);
  solve->add_option("--sigma", solve_spec.problem.noise, "Noise level sigma / ||x*||^2")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  solve->add_flag("--sigma-absolute", sigma_absolute, "Read --sigma as the noise standard deviation itself");
  solve->add_option("--beta", solve_spec.solver.beta, "Mirror map parameter")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  solve->add_option("--eta", solve_eta, "Step size (default 0.3 / mean(Y)^1.5)")->check(CLI::PositiveNumber);
  solve->add_option("--iters", solve_spec.solver.max_iters, "Iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  solve->add_option("--record-every", solve_spec.solver.record_every, "Record every r-th iterate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  solve->add_option("--holdout", solve_holdout, "Train on this fraction and stop on the rest")
      ->check(CLI::Range(0.0, 1.0));
  add_common(solve, common, false);

  // sweep
  spr_sweep_spec sweep_spec = spr_sweep_spec_default();
  std::string axis_name;
  std::vector<double> values;
  std::vector<std::string> metrics{"oracle"};
  std::optional<double> sweep_eta;
  bool beta_relative = false;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
  sweep->add_option("--axis", axis_name, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"noise", "samples", "sparsity", "beta"}));
  sweep->add_option("--values", values, "Values of the swept parameter")->required()->delimiter(',');
  sweep->add_option("--n", sweep_spec.n, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--m", sweep_spec.m, "Measurements")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--k", sweep_spec.k, "Sparsity")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--sigma", sweep_spec.sigma_over_norm_sq, "Noise level sigma / ||x*||^2")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--beta", sweep_spec.beta, "Mirror map parameter")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--beta-relative", beta_relative, "Scale beta by ||x*|| in every trial");
  sweep->add_option("--eta", sweep_eta, "Fixed step size")->check(CLI::PositiveNumber);
  sweep->add_option("--t-max", sweep_spec.t_max, "Iterations per run")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--trials", sweep_spec.trials, "Trials per value")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--metrics", metrics, "oracle, holdout, warmup")
      ->delimiter(',')
      ->check(CLI::IsMember({"oracle", "holdout", "warmup"}))
      ->capture_default_str();
  sweep->add_option("--holdout-fraction", sweep_spec.holdout_fraction, "Training fraction for the hold-out rule")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_common(sweep, common, true);

  // figure
  spr_figure_options figure_options = spr_figure_options_default();
  std::string figure_name;
  auto* figure = app.add_subcommand("figure", "Run a preset experiment");
  figure->add_option("--name", figure_name, "Preset")
      ->required()
      ->check(CLI::IsMember({"1-left", "1-center", "1-right", "2-beta", "2-k", "3"}));
  figure->add_option("--scale", figure_options.scale, "Shrink n, m and the trial count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  figure->add_option("--trials", figure_options.trials, "Override the trial count")->check(CLI::PositiveNumber);
  figure->add_option("--t-max", figure_options.t_max, "Override the iteration budget")->check(CLI::PositiveNumber);
  add_common(figure, common, true);

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the invariant checks");
  selftest->add_option("--seed", common.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const fs::path dir = output_dir(common);

  if (*selftest) {
    int all = 0;
    auto print = [](const char* name, int passed, const char* detail, void*) {
      std::printf("%-20s %s  %s\n", name, passed ? "PASS" : "FAIL", detail);
    };
    const spr_status s = spr_selftest(common.seed, print, nullptr, &all);
    if (s != SPR_OK) {
      std::cerr << "sprmd: " << spr_last_error() << '\n';
      return kExitRuntime;
    }
    return all ? 0 : kExitRuntime;
  }

  if (!prepare(dir)) return kExitRuntime;

  if (*solve) {
    solve_spec.problem.noise_relative = sigma_absolute ? 0 : 1;
    solve_spec.solver.eta = solve_eta.value_or(0.0);
    solve_spec.holdout_fraction = solve_holdout.value_or(0.0);
    solve_spec.seed = common.seed;
    spr_report* report = nullptr;
    const spr_status s = spr_run_solve(&solve_spec, &report);
    if (!report) return report_failure(dir, s);
    const int written = write_report(report, dir, "solve");
    spr_report_free(report);
    if (s != SPR_OK) return report_failure(dir, s);
    return written;
  }

  spr_report* report = nullptr;
  spr_status s = SPR_OK;
  std::string stem;
  if (*sweep) {
    sweep_spec.axis = axis_name == "noise"      ? SPR_AXIS_NOISE
                      : axis_name == "samples"  ? SPR_AXIS_SAMPLES
                      : axis_name == "sparsity" ? SPR_AXIS_SPARSITY
                                                : SPR_AXIS_BETA;
    sweep_spec.values = values.data();
    sweep_spec.value_count = values.size();
    sweep_spec.metrics = 0;
    for (const auto& m : metrics) {
      sweep_spec.metrics |= m == "oracle" ? SPR_METRIC_ORACLE : m == "holdout" ? SPR_METRIC_HOLDOUT : SPR_METRIC_WARMUP;
    }
    sweep_spec.eta = sweep_eta.value_or(0.0);
    sweep_spec.beta_relative_to_norm = beta_relative ? 1 : 0;
    sweep_spec.master_seed = common.seed;
    s = spr_run_sweep(&sweep_spec, common.threads, &report);
    stem = "sweep";
  } else {
    figure_options.seed = common.seed;
    s = spr_run_figure(figure_name.c_str(), &figure_options, common.threads, &report);
    stem = "figure-" + figure_name;
  }
  if (s != SPR_OK) return report_failure(dir, s);
  const int written = write_report(report, dir, stem);
  spr_report_free(report);
  return written;
}
