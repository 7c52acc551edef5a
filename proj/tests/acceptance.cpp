// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 6 7        run a subset
//
// Exit status is 0 only when every selected criterion passes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sparse_pr/empirical_risk.hpp"
#include "sparse_pr/harness.hpp"
#include "sparse_pr/md_solver.hpp"
#include "sparse_pr/mirror_geometry.hpp"
#include "sparse_pr/rng.hpp"
#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/stopping.hpp"

using namespace spr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

constexpr std::uint64_t kMaster = 20240611;

// Risk gradient against a five-point stencil. The risk is a quartic polynomial
// along every line, so the stencil is exact up to rounding.
Outcome gradient_correctness() {
  Rng rng(derive_seed(kMaster, 1, 0));
  double worst = 0.0;
  for (int p = 0; p < 50; ++p) {
    const Problem prob = generate_problem(ProblemSpec{15, 3, 40, 0.1, true, {}}, derive_seed(kMaster, 1, p + 1));
    Vector x(15);
    for (Eigen::Index i = 0; i < 15; ++i) x[i] = rng.normal() * 0.5;
    const Vector g = grad_risk(x, prob.data);
    const double h = 1e-3;
    Vector fd(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
      auto f = [&](double s) {
        Vector y = x;
        y[i] += s;
        return risk(y, prob.data);
      };
      fd[i] = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    }
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  return {worst <= 1e-6, "max relative error " + fmt(worst) + " over 50 points"};
}

// Two independent runs: dual-domain mirror descent and EG+-, each evaluating
// its own gradient.
Outcome update_equivalence() {
  const double beta = 1e-6;
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const Problem p = generate_problem(ProblemSpec{100, 4, 300, 0.1, true, {}}, derive_seed(kMaster, 2, s));
    const double eta = default_step_size(p.data);
    MirrorState md = initialize(p.data, beta);
    EgState eg = eg_initialize(p.data, beta);
    for (int t = 0; t < 200; ++t) {
      md = md_step(md, grad_risk(md.primal, p.data), eta, beta);
      const Vector x = eg.primal();
      eg = eg_step(eg, grad_risk(x, p.data), eta);
      worst = std::max(worst, (md.primal - eg.primal()).norm() / md.primal.norm());
    }
  }
  return {worst <= 1e-9, "max relative difference " + fmt(worst) + " over 10 seeds x 200 steps"};
}

Outcome bregman_identity() {
  const double beta = 1e-12;
  const Problem p = generate_problem(ProblemSpec{500, 5, 800, 0.1, true, {}}, derive_seed(kMaster, 3, 0));
  const HyperbolicMirrorMap map(beta);
  const double eta = default_step_size(p.data);
  const Vector& ref = p.signal.values();
  MirrorState x = initialize(p.data, beta);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const Vector g = grad_risk(x.primal, p.data);
    const MirrorState next = md_step(x, g, eta, beta);
    const double d1 = bregman(ref, next.primal, map);
    const double d0 = bregman(ref, x.primal, map);
    const double lin = -eta * g.dot(x.primal - ref);
    const double step = bregman(x.primal, next.primal, map);
    const double scale = std::max({std::abs(d1), std::abs(d0), std::abs(lin), std::abs(step)});
    worst = std::max(worst, std::abs((d1 - d0) - (lin + step)) / scale);
    x = next;
  }
  return {worst <= 1e-8, "max relative residual " + fmt(worst) + " over 500 steps"};
}

// Divergence straight from the definition, in extended precision.
long double bregman_ld(const Vector& a, const Vector& b, long double beta) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const long double x = a[i];
    const long double y = b[i];
    const long double phx = x * std::asinh(x / beta) - std::sqrt(x * x + beta * beta);
    const long double phy = y * std::asinh(y / beta) - std::sqrt(y * y + beta * beta);
    total += phx - phy - std::asinh(y / beta) * (x - y);
  }
  return total;
}

Outcome sandwich() {
  Rng rng(derive_seed(kMaster, 4, 0));
  std::size_t violations = 0;
  const std::size_t pairs = 10000;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double beta = p % 2 ? 1e-2 : 1e-6;
    const SparseSignal xs = sample_signal(20, 4, rng);
    const Vector& ref = xs.values();
    Vector x = ref;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = ref[i] != 0.0 ? ref[i] * rng.uniform(0.5, 2.0) : rng.sign() * rng.uniform() * 3.0 * beta;
    }
    const long double d = bregman_ld(ref, x, beta);
    const long double sq = (x - ref).squaredNorm();
    const long double inf = std::max(x.cwiseAbs().maxCoeff(), ref.cwiseAbs().maxCoeff());
    const bool lower = sq <= 2.0L * std::sqrt(inf * inf + (long double)beta * beta) * d * (1.0L + 1e-10L);
    long double on = 0.0L;
    long double off = 0.0L;
    double xmin = 1e300;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (ref[i] != 0.0) {
        on += (long double)(x[i] - ref[i]) * (x[i] - ref[i]);
        xmin = std::min(xmin, std::abs(ref[i]));
      } else {
        off += std::abs(x[i]);
      }
    }
    // sqrt(k) / (c ||x*||) with c = sqrt(k) x_min / ||x*||.
    const long double k = static_cast<long double>(xs.sparsity());
    const long double c = std::sqrt(k) * xmin / xs.norm2();
    const bool upper = d <= (std::sqrt(k) / (c * xs.norm2()) * on + off) * (1.0L + 1e-10L);
    if (!lower || !upper) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(pairs) + " pairs"};
}

struct NoiselessRuns {
  std::size_t recovered = 0;
  std::size_t confined = 0;
  std::size_t runs = 0;
  double worst_final = 0.0;
};

// Criterion 5 runs; criterion 11 reads the same runs.
const NoiselessRuns& noiseless_runs() {
  static const NoiselessRuns result = [] {
    NoiselessRuns r;
    const double beta = 1e-12;
    for (int s = 0; s < 20; ++s) {
      const Problem p = generate_problem(ProblemSpec{500, 5, 800, 0.0, true, {}}, derive_seed(kMaster, 5, s));
      const Vector& xs = p.signal.values();
      const double norm = p.signal.norm2();
      std::set<std::size_t> support(p.signal.support().begin(), p.signal.support().end());
      std::vector<double> off_mass;
      std::vector<double> rel;
      SolverConfig cfg;
      cfg.beta = beta;
      cfg.max_iters = 3000;
      cfg.record_every = 3000;
      RunOptions opt;
      opt.observer = [&](std::size_t, const Vector& x) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          if (!support.count(static_cast<std::size_t>(i))) off += std::abs(x[i]);
        }
        off_mass.push_back(off);
        rel.push_back(std::min((x - xs).norm(), (x + xs).norm()) / norm);
        return true;
      };
      ++r.runs;
      try {
        run(p.data, cfg, opt);
      } catch (const Error&) {
        continue;
      }
      r.worst_final = std::max(r.worst_final, rel.back());
      if (rel.back() <= 1e-4) ++r.recovered;
      // Oracle stop: earliest minimizer over t >= 1.
      std::size_t t_star = 1;
      for (std::size_t t = 1; t < rel.size(); ++t) {
        if (rel[t] < rel[t_star]) t_star = t;
      }
      const double bound = std::sqrt(500.0 * beta / norm) * norm;
      bool ok = true;
      for (std::size_t t = 0; t <= t_star; ++t) ok = ok && off_mass[t] <= bound;
      if (ok) ++r.confined;
    }
    return r;
  }();
  return result;
}

Outcome noiseless_recovery() {
  const NoiselessRuns& r = noiseless_runs();
  return {r.recovered * 10 >= r.runs * 9, std::to_string(r.recovered) + "/" + std::to_string(r.runs) +
                                              " seeds with final relative distance <= 1e-4"};
}

Outcome confinement() {
  const NoiselessRuns& r = noiseless_runs();
  return {r.confined * 100 >= r.runs * 95,
          std::to_string(r.confined) + "/" + std::to_string(r.runs) + " seeds confined up to the oracle stop"};
}

SweepSpec desk_sweep(SweepAxis axis, std::vector<double> values, std::uint64_t stream) {
  SweepSpec s;
  s.n = 500;
  s.k = 5;
  s.m = 800;
  s.sigma_over_norm_sq = 0.1;
  s.beta = 1e-20;
  s.t_max = 5000;
  s.trials = 20;
  s.master_seed = derive_seed(kMaster, stream, 0);
  s.axis = axis;
  s.values = std::move(values);
  s.metrics = SweepMetrics{true, false, false};
  return s;
}

std::string means(const SweepResult& r, bool warmup = false) {
  std::string out;
  for (const auto& p : r.points) {
    const auto& m = warmup ? p.warmup : p.oracle;
    out += (out.empty() ? "" : " ") + fmt(m ? m->mean : NAN);
  }
  return out;
}

Outcome error_slope(SweepSpec spec, double lo, double hi) {
  const SweepResult r = run_sweep(spec, 0);
  if (!r.fits.oracle) return {false, "no fit"};
  const LinearFit& f = *r.fits.oracle;
  return {f.slope >= lo && f.slope <= hi,
          "slope " + fmt(f.slope) + " (R^2 " + fmt(f.r_squared) + "), means " + means(r)};
}

Outcome sample_scaling() {
  return error_slope(desk_sweep(SweepAxis::samples, {400, 600, 900, 1350, 2000}, 6), -0.65, -0.35);
}

Outcome sparsity_scaling() {
  SweepSpec s = desk_sweep(SweepAxis::sparsity, {3, 5, 8, 12, 18}, 7);
  s.m = 1200;
  return error_slope(s, 0.3, 0.8);
}

Outcome noise_linearity() {
  SweepSpec s = desk_sweep(SweepAxis::noise, {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}, 8);
  s.m = 500;
  const SweepResult r = run_sweep(s, 0);
  if (!r.fits.oracle) return {false, "no fit"};
  const LinearFit& f = *r.fits.oracle;
  return {f.r_squared >= 0.9, "R^2 " + fmt(f.r_squared) + ", slope " + fmt(f.slope) + ", means " + means(r)};
}

Outcome warmup_beta() {
  SweepSpec s = desk_sweep(SweepAxis::beta, {1e-4, 1e-8, 1e-12, 1e-16, 1e-20, 1e-24}, 9);
  s.trials = 10;
  s.metrics = SweepMetrics{false, false, true};
  const SweepResult r = run_sweep(s, 0);
  // Independent fit of mean T1 against log(1/beta).
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : r.points) {
    if (!p.warmup || p.warmup->count == 0) continue;
    xs.push_back(std::log(1.0 / p.axis_value));
    ys.push_back(p.warmup->mean);
  }
  if (xs.size() < 3) return {false, "T1 reached at fewer than 3 beta values"};
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = sxy * sxy / (sxx * syy);
  return {r2 >= 0.9 && slope > 0.0 && xs.size() == r.points.size(),
          "slope " + fmt(slope) + " per log(1/beta), R^2 " + fmt(r2) + ", mean T1 " + means(r, true)};
}

Outcome warmup_sparsity() {
  SweepSpec s = desk_sweep(SweepAxis::sparsity, {3, 5, 8, 12, 18}, 10);
  s.m = 1200;
  s.beta = 1e-12;
  s.trials = 10;
  s.metrics = SweepMetrics{false, false, true};
  const SweepResult r = run_sweep(s, 0);
  std::vector<double> ks;
  std::vector<double> t1;
  for (const auto& p : r.points) {
    if (!p.warmup || p.warmup->count == 0) continue;
    ks.push_back(p.axis_value);
    t1.push_back(p.warmup->mean);
  }
  // Values are distinct, so Spearman reduces to 1 - 6 sum d^2 / (n (n^2 - 1)).
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      r[i] = 1.0 + static_cast<double>(std::count_if(v.begin(), v.end(), [&](double w) { return w < v[i]; }));
    }
    return r;
  };
  const auto rk = ranks(ks);
  const auto rt = ranks(t1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rk.size(); ++i) d2 += (rk[i] - rt[i]) * (rk[i] - rt[i]);
  const double n = static_cast<double>(rk.size());
  const double rho = rk.size() >= 2 ? 1.0 - 6.0 * d2 / (n * (n * n - 1.0)) : 0.0;
  return {rho >= 0.9 && rk.size() == r.points.size(), "Spearman " + fmt(rho) + ", mean T1 " + means(r, true)};
}

Outcome holdout_vs_oracle() {
  SweepSpec s = desk_sweep(SweepAxis::noise, {0.1}, 12);
  s.metrics = SweepMetrics{true, true, false};
  const SweepResult r = run_sweep(s, 0);
  const double oracle = r.points[0].oracle->mean;
  const double holdout = r.points[0].holdout->mean;
  return {holdout >= oracle && holdout <= 3.0 * oracle,
          "mean oracle " + fmt(oracle) + ", mean hold-out " + fmt(holdout) + " (ratio " + fmt(holdout / oracle) + ")"};
}

Outcome population_gradient() {
  Rng rng(derive_seed(kMaster, 13, 0));
  const SparseSignal xs = sample_signal(10, 3, rng);
  Vector x(10);
  for (Eigen::Index i = 0; i < 10; ++i) x[i] = 0.3 * rng.normal();
  const double sigma = 0.1 * xs.norm2() * xs.norm2();
  const std::size_t draws = 100000;
  Vector sum = Vector::Zero(10);
  Vector sumsq = Vector::Zero(10);
  for (std::size_t d = 0; d < draws; ++d) {
    Matrix a(1, 10);
    for (Eigen::Index i = 0; i < 10; ++i) a(0, i) = rng.normal();
    const double proj = a.row(0).dot(xs.values());
    Vector y(1);
    y[0] = proj * proj + sigma * rng.normal();
    const Vector g = grad_risk(x, PhaselessDataset(a, y, sigma, 0));
    sum += g;
    sumsq += g.cwiseProduct(g);
  }
  const Vector mean = sum / static_cast<double>(draws);
  const double nx = x.squaredNorm();
  const double ns = xs.values().squaredNorm();
  const Vector closed = (3.0 * nx - ns) * x - 2.0 * x.dot(xs.values()) * xs.values();
  const Vector lib = population_grad(x, xs);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double var = sumsq[i] / draws - mean[i] * mean[i];
    const double se = std::sqrt(var / draws);
    worst = std::max(worst, std::abs(mean[i] - lib[i]) / se);
  }
  const double agree = (closed - lib).norm() / closed.norm();
  return {worst <= 5.0 && agree <= 1e-12,
          "max deviation " + fmt(worst) + " standard errors, closed form agreement " + fmt(agree)};
}

Outcome initialization_quality() {
  std::size_t good = 0;
  for (int t = 0; t < 200; ++t) {
    const Problem p = generate_problem(ProblemSpec{200, 5, 2000, 0.0, true, {}}, derive_seed(kMaster, 14, t));
    const std::size_t i0 = initial_coordinate(p.data);
    const Vector& xs = p.signal.values();
    const double v = std::abs(xs[static_cast<Eigen::Index>(i0)]);
    if (v != 0.0 && v >= 0.5 * xs.cwiseAbs().maxCoeff()) ++good;
  }
  return {good * 100 >= 200 * 95, std::to_string(good) + "/200 trials"};
}

int run_cli(const std::string& args) {
  const std::string cmd = "'" SPRMD_PATH "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sparse_pr_acceptance";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve --n 200 --m 400 --k 4 --sigma 0.1 --iters 800 --holdout 0.9 --seed 5", "solve"},
      {"sweep --axis samples --values 200,300,450 --n 100 --k 3 --t-max 400 --trials 3 --metrics oracle,holdout,warmup "
       "--seed 9 --threads 1",
       "sweep"},
      {"figure --name 3 --scale 0.004 --t-max 200 --threads 1", "figure-3"}};
  std::size_t identical = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string files[2][2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::to_string(c) + "_" + std::to_string(rep));
      fs::remove_all(dir);
      if (run_cli(commands[c].first + " --out '" + dir.string() + "'") != 0) return {false, "command failed"};
      files[rep][0] = slurp(dir / (commands[c].second + ".csv"));
      files[rep][1] = slurp(dir / (commands[c].second + ".json"));
    }
    if (!files[0][0].empty() && files[0][0] == files[1][0] && files[0][1] == files[1][1]) ++identical;
  }
  return {identical == commands.size(),
          std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient correctness", gradient_correctness},
      {2, "update equivalence", update_equivalence},
      {3, "Bregman identity", bregman_identity},
      {4, "quadratic sandwich", sandwich},
      {5, "noiseless recovery", noiseless_recovery},
      {6, "sample-size scaling", sample_scaling},
      {7, "sparsity scaling", sparsity_scaling},
      {8, "noise linearity", noise_linearity},
      {9, "warm-up vs beta", warmup_beta},
      {10, "warm-up vs k", warmup_sparsity},
      {11, "off-support confinement", confinement},
      {12, "hold-out vs oracle", holdout_vs_oracle},
      {13, "population gradient", population_gradient},
      {14, "initialization quality", initialization_quality},
      {15, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok = ok && o.pass;
    std::printf("%s  %2d %-24s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
