#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sparse_pr/rng.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

/// Ground-truth sparse vector together with its support.
///
/// The support is derived from the values: it is exactly the sorted set of
/// nonzero indices. A zero vector (empty support) is representable so that
/// degenerate inputs can be tested, but `sample_signal` never produces one.
class SparseSignal {
 public:
  explicit SparseSignal(Vector values);

  const Vector& values() const noexcept { return values_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  double norm2() const noexcept { return norm2_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.size()); }
  std::size_t sparsity() const noexcept { return support_.size(); }

  /// Smallest nonzero magnitude; 0 for the zero vector.
  double min_abs_nonzero() const noexcept;
  double max_abs() const noexcept;

  /// sqrt(k) * min_i |x_i| / ||x||_2, the largest constant c for which the
  /// minimum-magnitude condition x_min >= c ||x||_2 / sqrt(k) holds. Reported
  /// in run summaries; nothing enforces a threshold on it.
  double strength_constant() const noexcept;

 private:
  Vector values_;
  std::vector<std::size_t> support_;
  double norm2_ = 0.0;
};

/// Sensing matrix, observations and the generation metadata.
///
/// `sigma` is the standard deviation of the Gaussian noise that was added. The
/// sub-exponential (psi_1) norm of that noise is sqrt(2/pi) * sigma.
class PhaselessDataset {
 public:
  PhaselessDataset(Matrix sensing, Vector observations, double sigma, std::uint64_t seed,
                   std::size_t sparsity = 0);

  const Matrix& sensing() const noexcept { return sensing_; }
  const Vector& observations() const noexcept { return observations_; }
  double sigma() const noexcept { return sigma_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Sparsity of the generating signal if known, 0 otherwise.
  std::size_t sparsity() const noexcept { return sparsity_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(sensing_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(sensing_.cols()); }

  /// Dataset made of the given rows, in the given order.
  PhaselessDataset subset(std::span<const std::size_t> rows) const;

 private:
  Matrix sensing_;
  Vector observations_;
  double sigma_;
  std::uint64_t seed_;
  std::size_t sparsity_;
};

struct MagnitudeRange {
  double lo = 0.15;
  double hi = 1.0;
};

/// k support positions drawn uniformly without replacement; magnitudes uniform
/// on [range.lo, range.hi] with independent uniform signs.
SparseSignal sample_signal(std::size_t n, std::size_t k, Rng& rng, MagnitudeRange range = {});

/// m rows of i.i.d. N(0,1) sensing entries (row-major draw order), then m noise
/// draws N(0, sigma^2); Y_j = (A_j . x)^2 + eps_j.
PhaselessDataset sample_dataset(const SparseSignal& signal, std::size_t m, double sigma, Rng& rng);

/// sqrt(max(0, mean(Y))), the estimate of ||x*||_2.
double magnitude_estimate(const PhaselessDataset& data);

struct ProblemSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  /// Interpreted as sigma / ||x*||_2^2 when `noise_relative`, else as sigma.
  double noise = 0.0;
  bool noise_relative = true;
  MagnitudeRange range{};
};

struct Problem {
  SparseSignal signal;
  PhaselessDataset data;
};

/// Draws the signal and then the dataset from a single generator seeded with
/// `seed`. Calling it again with the same arguments reproduces both exactly.
Problem generate_problem(const ProblemSpec& spec, std::uint64_t seed);

/// CSV layout:
///
///   n,m,k,sigma,seed
///   <n>,<m>,<k>,<sigma>,<seed>
///   y
///   <Y_1>
///   ...
///   <Y_m>
///   [sensing
///    <A_11>,...,<A_1n>
///    ...]
///
/// Without the sensing block the matrix is regenerated from (n, k, m, sigma,
/// seed) through `generate_problem` with absolute noise, which requires k >= 1.
void write_dataset_csv(std::ostream& out, const PhaselessDataset& data, bool include_sensing);
PhaselessDataset read_dataset_csv(std::istream& in);

}  // namespace spr
