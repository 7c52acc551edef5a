#include <doctest.h>

#include <cmath>

#include "sparse_pr/empirical_risk.hpp"
#include "sparse_pr/rng.hpp"

using namespace spr;

namespace {

// Row-by-row loops, independent of the matrix-vector formulation.
double naive_risk(const Vector& x, const PhaselessDataset& d) {
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < d.sensing().rows(); ++j) {
    long double p = 0.0L;
    for (Eigen::Index i = 0; i < x.size(); ++i) p += static_cast<long double>(d.sensing()(j, i)) * x[i];
    const long double r = p * p - d.observations()[j];
    total += r * r;
  }
  return static_cast<double>(total / (4.0L * d.sensing().rows()));
}

Vector naive_grad(const Vector& x, const PhaselessDataset& d) {
  std::vector<long double> g(static_cast<std::size_t>(x.size()), 0.0L);
  for (Eigen::Index j = 0; j < d.sensing().rows(); ++j) {
    long double p = 0.0L;
    for (Eigen::Index i = 0; i < x.size(); ++i) p += static_cast<long double>(d.sensing()(j, i)) * x[i];
    const long double w = (p * p - d.observations()[j]) * p;
    for (Eigen::Index i = 0; i < x.size(); ++i) g[static_cast<std::size_t>(i)] += w * d.sensing()(j, i);
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = static_cast<double>(g[static_cast<std::size_t>(i)] / d.sensing().rows());
  return out;
}

Vector random_point(Eigen::Index n, Rng& rng) {
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 0.4 * rng.normal();
  return x;
}

}  // namespace

TEST_CASE("risk and gradient match explicit sums") {
  const Problem p = generate_problem(ProblemSpec{12, 3, 30, 0.2, true, {}}, 1);
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(12, rng);
    CHECK(risk(x, p.data) == doctest::Approx(naive_risk(x, p.data)).epsilon(1e-12));
    const Vector g = grad_risk(x, p.data);
    CHECK((g - naive_grad(x, p.data)).norm() <= 1e-12 * (1.0 + g.norm()));
  }
}

TEST_CASE("risk is zero at the truth for noiseless data, and sign invariant") {
  const Problem p = generate_problem(ProblemSpec{10, 2, 25, 0.0, true, {}}, 3);
  CHECK(risk(p.signal.values(), p.data) <= 1e-30);
  CHECK(grad_risk(p.signal.values(), p.data).norm() <= 1e-14);
  Rng rng(4);
  const Vector x = random_point(10, rng);
  CHECK(risk(x, p.data) == risk(Vector(-x), p.data));
  CHECK((grad_risk(x, p.data) + grad_risk(Vector(-x), p.data)).norm() == 0.0);
}

TEST_CASE("gradient against central differences") {
  const Problem p = generate_problem(ProblemSpec{15, 4, 40, 0.1, true, {}}, 5);
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Vector x = random_point(15, rng);
    const Vector g = grad_risk(x, p.data);
    const double h = 1e-5;
    Vector fd(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
      Vector a = x;
      Vector b = x;
      a[i] += h;
      b[i] -= h;
      fd[i] = (risk(a, p.data) - risk(b, p.data)) / (2 * h);
    }
    CHECK((g - fd).norm() / fd.norm() < 1e-7);
  }
}

TEST_CASE("evaluator reuse is bit-identical and evaluate_risk is consistent") {
  const Problem p = generate_problem(ProblemSpec{20, 3, 50, 0.1, true, {}}, 7);
  Rng rng(8);
  const Vector x = random_point(20, rng);
  const Vector y = random_point(20, rng);
  RiskEvaluator ev(p.data);
  Vector g1;
  Vector g2;
  const double v1 = ev.value_and_gradient(x, g1);
  ev.value(y);
  const double v2 = ev.value_and_gradient(x, g2);
  CHECK(v1 == v2);
  CHECK(g1 == g2);
  const RiskEvaluation with = evaluate_risk(x, p.data, true);
  const RiskEvaluation without = evaluate_risk(x, p.data, false);
  CHECK(with.value == v1);
  CHECK(*with.gradient == g1);
  CHECK_FALSE(without.gradient.has_value());
  CHECK_THROWS(risk(Vector::Zero(3), p.data));
}

TEST_CASE("population gradient closed form") {
  const SparseSignal xs(Vector::Unit(4, 1) * 2.0);
  Vector x(4);
  x << 1.0, 0.5, 0.0, -1.0;
  // (3 ||x||^2 - ||x*||^2) x - 2 (x . x*) x* with ||x||^2 = 2.25, ||x*||^2 = 4, x . x* = 1.
  const Vector expected = (3 * 2.25 - 4.0) * x - 2.0 * 1.0 * xs.values();
  CHECK((population_grad(x, xs) - expected).norm() < 1e-15);
  CHECK(population_grad(xs.values(), xs).norm() < 1e-15);
}

TEST_CASE("empirical gradient converges to the population gradient") {
  // Large m: the empirical gradient concentrates around its mean.
  const Problem p = generate_problem(ProblemSpec{6, 2, 200000, 0.0, true, {}}, 9);
  Rng rng(10);
  const Vector x = random_point(6, rng);
  const Vector g = grad_risk(x, p.data);
  const Vector pop = population_grad(x, p.signal);
  CHECK((g - pop).norm() / pop.norm() < 0.05);
}

TEST_CASE("coherence picks the nearer sign") {
  const Problem p = generate_problem(ProblemSpec{8, 2, 30, 0.0, true, {}}, 11);
  const Vector near_minus = -p.signal.values() * 1.1;
  const Coherence c = coherence_inner_product(near_minus, p.data, p.signal);
  CHECK(c.sign == -1);
  const Vector g = grad_risk(near_minus, p.data);
  CHECK(c.value == doctest::Approx(g.dot(near_minus + p.signal.values())));
  const Coherence c2 = coherence_from_gradient(g, near_minus, p.signal);
  CHECK(c2.value == c.value);
  CHECK(c2.sign == c.sign);
}
