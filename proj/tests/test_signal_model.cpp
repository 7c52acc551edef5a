#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sparse_pr/error.hpp"
#include "sparse_pr/signal_model.hpp"

using namespace spr;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("support, norm and magnitudes of a hand-written signal") {
  const SparseSignal s(vec({0.0, -0.5, 0.0, 2.0, 0.25}));
  CHECK(s.dim() == 5);
  CHECK(s.sparsity() == 3);
  CHECK(s.support() == std::vector<std::size_t>{1, 3, 4});
  CHECK(s.norm2() == doctest::Approx(std::sqrt(0.25 + 4.0 + 0.0625)).epsilon(1e-12));
  CHECK(s.min_abs_nonzero() == 0.25);
  CHECK(s.max_abs() == 2.0);
  CHECK(s.strength_constant() == doctest::Approx(std::sqrt(3.0) * 0.25 / std::sqrt(4.3125)));
}

TEST_CASE("zero signal is representable") {
  const SparseSignal s(Vector::Zero(4));
  CHECK(s.sparsity() == 0);
  CHECK(s.norm2() == 0.0);
  CHECK(s.min_abs_nonzero() == 0.0);
  CHECK(s.strength_constant() == 0.0);
}

TEST_CASE("non-finite signal values are rejected") {
  CHECK_THROWS_AS(SparseSignal(vec({1.0, std::numeric_limits<double>::quiet_NaN()})), Error);
}

TEST_CASE("sampled signals have exactly k entries in the magnitude range") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const SparseSignal s = sample_signal(40, 7, rng);
    REQUIRE(s.sparsity() == 7);
    for (std::size_t i : s.support()) {
      const double a = std::abs(s.values()[static_cast<Eigen::Index>(i)]);
      CHECK(a >= 0.15);
      CHECK(a <= 1.0);
    }
  }
  CHECK_THROWS_AS(sample_signal(3, 4, rng), InvalidParameter);
  CHECK_THROWS_AS(sample_signal(3, 0, rng), InvalidParameter);
  CHECK_THROWS_AS(sample_signal(3, 1, rng, MagnitudeRange{0.0, 1.0}), InvalidParameter);
}

TEST_CASE("support positions are uniform over coordinates") {
  Rng rng(12);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const SparseSignal s = sample_signal(10, 3, rng);
    for (std::size_t i : s.support()) ++hits[i];
  }
  // Each coordinate is in the support with probability 3/10.
  const double p = 0.3;
  for (int h : hits) CHECK(std::abs(h / double(trials) - p) < 5.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("noiseless observations are squared projections") {
  Rng rng(13);
  const SparseSignal s = sample_signal(8, 2, rng);
  const PhaselessDataset d = sample_dataset(s, 25, 0.0, rng);
  REQUIRE(d.rows() == 25);
  REQUIRE(d.dim() == 8);
  for (Eigen::Index j = 0; j < 25; ++j) {
    double proj = 0.0;
    for (Eigen::Index i = 0; i < 8; ++i) proj += d.sensing()(j, i) * s.values()[i];
    CHECK(d.observations()[j] == doctest::Approx(proj * proj).epsilon(1e-12));
  }
  CHECK(d.sparsity() == 2);
}

TEST_CASE("noise has the requested standard deviation") {
  const ProblemSpec spec{6, 2, 40000, 0.5, true, {}};
  const Problem p = generate_problem(spec, 3);
  const double sigma = 0.5 * p.signal.norm2() * p.signal.norm2();
  CHECK(p.data.sigma() == doctest::Approx(sigma).epsilon(1e-15));
  const Vector clean = (p.data.sensing() * p.signal.values()).array().square();
  const Vector eps = p.data.observations() - clean;
  const double m = static_cast<double>(eps.size());
  const double mean = eps.mean();
  const double var = (eps.array() - mean).square().sum() / (m - 1);
  CHECK(std::abs(mean) < 5.0 * sigma / std::sqrt(m));
  CHECK(std::abs(var / (sigma * sigma) - 1.0) < 5.0 * std::sqrt(2.0 / m));
}

TEST_CASE("generate_problem is a pure function of its seed") {
  const ProblemSpec spec{30, 4, 50, 0.1, true, {}};
  const Problem a = generate_problem(spec, 99);
  const Problem b = generate_problem(spec, 99);
  const Problem c = generate_problem(spec, 100);
  CHECK(a.signal.values() == b.signal.values());
  CHECK(a.data.sensing() == b.data.sensing());
  CHECK(a.data.observations() == b.data.observations());
  CHECK(a.data.seed() == 99);
  CHECK(a.data.sensing() != c.data.sensing());
}

TEST_CASE("noise level changes only the noise") {
  const Problem quiet = generate_problem(ProblemSpec{30, 4, 50, 0.0, true, {}}, 5);
  const Problem loud = generate_problem(ProblemSpec{30, 4, 50, 0.3, true, {}}, 5);
  CHECK(quiet.signal.values() == loud.signal.values());
  CHECK(quiet.data.sensing() == loud.data.sensing());
  CHECK(quiet.data.observations() != loud.data.observations());
}

TEST_CASE("dataset validation") {
  Matrix a = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(PhaselessDataset(a, Vector::Zero(2), 0.0, 0), InvalidParameter);
  CHECK_THROWS_AS(PhaselessDataset(a, Vector::Zero(3), -1.0, 0), InvalidParameter);
  Vector y = Vector::Zero(3);
  y[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PhaselessDataset(a, y, 0.0, 0), Error);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(PhaselessDataset(a, Vector::Zero(3), 0.0, 0), Error);
}

TEST_CASE("subset keeps the requested rows in order") {
  const Problem p = generate_problem(ProblemSpec{5, 2, 10, 0.1, true, {}}, 1);
  const std::vector<std::size_t> rows{7, 2, 9};
  const PhaselessDataset s = p.data.subset(rows);
  REQUIRE(s.rows() == 3);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    CHECK(s.sensing().row(static_cast<Eigen::Index>(r)) == p.data.sensing().row(static_cast<Eigen::Index>(rows[r])));
    CHECK(s.observations()[static_cast<Eigen::Index>(r)] == p.data.observations()[static_cast<Eigen::Index>(rows[r])]);
  }
  const std::vector<std::size_t> bad{10};
  CHECK_THROWS_AS(p.data.subset(bad), InvalidParameter);
}

TEST_CASE("magnitude estimate tracks the signal norm") {
  const Problem p = generate_problem(ProblemSpec{20, 3, 50000, 0.0, true, {}}, 8);
  // E[Y] = ||x*||^2 and Var[Y] = 2 ||x*||^4.
  const double n2 = p.signal.norm2() * p.signal.norm2();
  CHECK(std::abs(magnitude_estimate(p.data) * magnitude_estimate(p.data) - n2) < 5.0 * std::sqrt(2.0 / 50000) * n2);

  Matrix a = Matrix::Ones(2, 2);
  Vector y(2);
  y << -3.0, 1.0;
  CHECK(magnitude_estimate(PhaselessDataset(a, y, 1.0, 0)) == 0.0);
}

TEST_CASE("dataset CSV layout and round trip") {
  const Problem p = generate_problem(ProblemSpec{4, 2, 3, 0.25, false, {}}, 21);
  std::stringstream full;
  write_dataset_csv(full, p.data, true);
  std::string header;
  std::getline(full, header);
  CHECK(header == "n,m,k,sigma,seed");
  std::string params;
  std::getline(full, params);
  CHECK(params == "4,3,2,0.25,21");
  full.seekg(0);
  const PhaselessDataset back = read_dataset_csv(full);
  CHECK(back.sensing() == p.data.sensing());
  CHECK(back.observations() == p.data.observations());
  CHECK(back.sparsity() == 2);

  std::stringstream lean;
  write_dataset_csv(lean, p.data, false);
  CHECK(lean.str().find("sensing") == std::string::npos);
  const PhaselessDataset regen = read_dataset_csv(lean);
  CHECK(regen.sensing() == p.data.sensing());
  CHECK(regen.observations() == p.data.observations());
}

TEST_CASE("malformed dataset CSV is rejected") {
  std::stringstream no_header("1,2,3\n");
  CHECK_THROWS_AS(read_dataset_csv(no_header), Error);
  std::stringstream short_y("n,m,k,sigma,seed\n2,3,1,0,0\ny\n1\n2\n");
  CHECK_THROWS_AS(read_dataset_csv(short_y), Error);
  std::stringstream bad_num("n,m,k,sigma,seed\n2,1,1,0,0\ny\nabc\n");
  CHECK_THROWS(read_dataset_csv(bad_num));
  // Observations that do not match the regenerated matrix.
  std::stringstream forged("n,m,k,sigma,seed\n2,1,1,0,0\ny\n123456\n");
  CHECK_THROWS(read_dataset_csv(forged));
}
