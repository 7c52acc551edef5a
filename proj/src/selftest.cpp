#include "sparse_pr/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sparse_pr/empirical_risk.hpp"
#include "sparse_pr/format.hpp"
#include "sparse_pr/md_solver.hpp"
#include "sparse_pr/mirror_geometry.hpp"

namespace spr {

namespace {

CheckResult verdict(std::string name, bool passed, const std::string& what, double observed, double tolerance) {
  return CheckResult{std::move(name), passed,
                     what + " " + format_double(observed) + " (tolerance " + format_double(tolerance) + ")"};
}

template <typename F>
CheckResult guarded(const char* name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return CheckResult{name, false, std::string("exception: ") + e.what()};
  }
}

Vector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

CheckResult check_risk_gradient(std::uint64_t seed, std::size_t points, const GradientFn& gradient) {
  return guarded("risk_gradient", [&] {
    const Problem problem = generate_problem(ProblemSpec{15, 4, 40, 0.1, true, {}}, seed);
    const PhaselessDataset& data = problem.data;
    Rng rng(derive_seed(seed, 1, 0));
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
      const Vector x = random_vector(data.dim(), rng, 0.5);
      const Vector g = gradient ? gradient(x, data) : grad_risk(x, data);
      Vector fd(x.size());
      // The risk is a quartic, on which the five-point stencil is exact up to rounding.
      const double h = 1e-3;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto f = [&](double d) {
          Vector y = x;
          y[i] += d;
          return risk(y, data);
        };
        fd[i] = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
      }
      const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-300);
      worst = std::max(worst, rel);
    }
    return verdict("risk_gradient", worst <= 1e-6, "max relative error", worst, 1e-6);
  });
}

CheckResult check_mirror_gradient(std::uint64_t seed) {
  return guarded("mirror_gradient", [&] {
    Rng rng(seed);
    double worst_grad = 0.0;
    double worst_inverse = 0.0;
    for (double beta : {1e-2, 1.0, 10.0}) {
      const HyperbolicMirrorMap map(beta);
      for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_vector(6, rng);
        const Vector g = grad_phi(x, map);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
          Vector a = x;
          Vector b = x;
          a[i] += h;
          b[i] -= h;
          const double fd = (phi(a, map) - phi(b, map)) / (2 * h);
          worst_grad = std::max(worst_grad, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
        }
        const Vector back = grad_phi_inverse(g, map);
        worst_inverse = std::max(worst_inverse, (back - x).norm() / x.norm());
      }
    }
    const bool ok = worst_grad <= 1e-6 && worst_inverse <= 1e-12;
    return CheckResult{"mirror_gradient", ok,
                       "gradient error " + format_double(worst_grad) + " (tolerance 1e-06), inverse error " +
                           format_double(worst_inverse) + " (tolerance 1e-12)"};
  });
}

CheckResult check_eg_equivalence(std::uint64_t seed, std::size_t steps) {
  return guarded("eg_equivalence", [&] {
    const double beta = 1e-6;
    const Problem problem = generate_problem(ProblemSpec{60, 3, 200, 0.0, true, {}}, seed);
    const PhaselessDataset& data = problem.data;
    const double eta = default_step_size(data);
    MirrorState md = initialize(data, beta);
    EgState eg = eg_initialize(data, beta);
    double worst = (md.primal - eg.primal()).norm() / md.primal.norm();
    for (std::size_t t = 0; t < steps; ++t) {
      const Vector g = grad_risk(md.primal, data);
      md = md_step(md, g, eta, beta);
      eg = eg_step(eg, g, eta);
      worst = std::max(worst, (md.primal - eg.primal()).norm() / md.primal.norm());
    }
    return verdict("eg_equivalence", worst <= 1e-9, "max relative difference", worst, 1e-9);
  });
}

CheckResult check_bregman_identity(std::uint64_t seed, std::size_t steps) {
  return guarded("bregman_identity", [&] {
    const double beta = 1e-6;
    const Problem problem = generate_problem(ProblemSpec{60, 3, 200, 0.1, true, {}}, seed);
    const PhaselessDataset& data = problem.data;
    const HyperbolicMirrorMap map(beta);
    const double eta = default_step_size(data);
    const Vector& ref = problem.signal.values();
    MirrorState state = initialize(data, beta);
    double worst = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      const Vector g = grad_risk(state.primal, data);
      const MirrorState next = md_step(state, g, eta, beta);
      const double d_next = bregman(ref, next.primal, map);
      const double d_now = bregman(ref, state.primal, map);
      const double lin = -eta * g.dot(state.primal - ref);
      const double step = bregman(state.primal, next.primal, map);
      const double scale = std::max({std::abs(d_next), std::abs(d_now), std::abs(lin), std::abs(step)});
      worst = std::max(worst, std::abs((d_next - d_now) - (lin + step)) / scale);
      state = next;
    }
    return verdict("bregman_identity", worst <= 1e-8, "max relative residual", worst, 1e-8);
  });
}

CheckResult check_bregman_forms(std::uint64_t seed) {
  return guarded("bregman_forms", [&] {
    Rng rng(seed);
    double worst = 0.0;
    for (double beta : {1e-12, 1e-6, 1e-2, 1.0}) {
      for (int trial = 0; trial < 500; ++trial) {
        const double x = rng.normal() * (trial % 2 ? 1.0 : beta * 10);
        const double y = x + rng.normal() * std::pow(10.0, -rng.uniform(0.0, 6.0)) * std::max(std::abs(x), beta);
        const double got = bregman_term(x, y, beta);
        double expected = 0.0;
        const double h = y - x;
        if (std::abs(h) <= 1e-4 * std::hypot(x, beta)) {
          // Expansion around x up to fourth order.
          const double r = std::hypot(x, beta);
          const double r2 = r * r;
          expected = h * h / (2 * r) *
                     (1.0 - 2.0 * x * h / (3.0 * r2) + (2 * x * x - beta * beta) * h * h / (4.0 * r2 * r2));
        } else {
          const long double lb = beta;
          const long double lx = x;
          const long double ly = y;
          const long double value = std::sqrt(ly * ly + lb * lb) - std::sqrt(lx * lx + lb * lb) -
                                    lx * (std::asinh(ly / lb) - std::asinh(lx / lb));
          expected = static_cast<double>(value);
          const double terms = std::abs(x) * std::abs(std::asinh(y / beta)) + std::hypot(y, beta);
          if (expected < 1e-4 * terms) continue;
        }
        worst = std::max(worst, std::abs(got - expected) / expected);
      }
    }
    return verdict("bregman_forms", worst <= 1e-7, "max relative error", worst, 1e-7);
  });
}

CheckResult check_sandwich(std::uint64_t seed, std::size_t pairs) {
  return guarded("sandwich", [&] {
    Rng rng(seed);
    std::size_t failures = 0;
    std::size_t applicable = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
      const double beta = p % 2 ? 1e-2 : 1e-6;
      const SparseSignal xstar = sample_signal(20, 4, rng);
      Vector x = xstar.values();
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) {
          x[i] *= rng.uniform(0.5, 2.0);
        } else {
          x[i] = rng.sign() * rng.uniform() * beta;
        }
      }
      const HyperbolicMirrorMap map(beta);
      const SandwichCheck c = sandwich_bounds(xstar, x, map);
      applicable += c.upper_applicable ? 1 : 0;
      if (!c.lower_ok || (c.upper_applicable && !c.upper_ok)) ++failures;
    }
    const bool ok = failures == 0 && applicable > 0;
    return CheckResult{"sandwich", ok,
                       std::to_string(failures) + " violations in " + std::to_string(applicable) +
                           " applicable pairs"};
  });
}

CheckResult check_dataset_round_trip(std::uint64_t seed) {
  return guarded("dataset_round_trip", [&] {
    const Problem problem = generate_problem(ProblemSpec{12, 3, 30, 0.0, false, {}}, seed);
    const PhaselessDataset& data = problem.data;
    bool ok = true;
    for (bool with_sensing : {true, false}) {
      std::stringstream buf;
      write_dataset_csv(buf, data, with_sensing);
      const PhaselessDataset back = read_dataset_csv(buf);
      ok = ok && back.sensing() == data.sensing() && back.observations() == data.observations() &&
           back.seed() == data.seed() && back.sigma() == data.sigma();
    }
    return CheckResult{"dataset_round_trip", ok, ok ? "bit-exact" : "mismatch after reading back"};
  });
}

CheckResult check_population_gradient(std::uint64_t seed) {
  return guarded("population_gradient", [&] {
    Rng rng(seed);
    const SparseSignal xstar = sample_signal(10, 3, rng);
    const double s2 = xstar.values().squaredNorm();
    auto f = [&](const Vector& x) {
      const double n2 = x.squaredNorm();
      const double c = x.dot(xstar.values());
      return 0.25 * (3 * n2 * n2 - 2 * n2 * s2 - 4 * c * c + 3 * s2 * s2);
    };
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = random_vector(10, rng, 0.5);
      const Vector g = population_grad(x, xstar);
      Vector fd(x.size());
      const double h = 1e-3;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector a = x;
        Vector b = x;
        Vector a2 = x;
        Vector b2 = x;
        a[i] += h;
        b[i] -= h;
        a2[i] += 2 * h;
        b2[i] -= 2 * h;
        fd[i] = (-f(a2) + 8 * f(a) - 8 * f(b) + f(b2)) / (12 * h);
      }
      worst = std::max(worst, (g - fd).norm() / fd.norm());
    }
    return verdict("population_gradient", worst <= 1e-8, "max relative error", worst, 1e-8);
  });
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  return {check_risk_gradient(derive_seed(seed, 0, 1)),    check_mirror_gradient(derive_seed(seed, 0, 2)),
          check_eg_equivalence(derive_seed(seed, 0, 3)),   check_bregman_identity(derive_seed(seed, 0, 4)),
          check_bregman_forms(derive_seed(seed, 0, 5)),    check_sandwich(derive_seed(seed, 0, 6)),
          check_dataset_round_trip(derive_seed(seed, 0, 7)), check_population_gradient(derive_seed(seed, 0, 8))};
}

}  // namespace spr
