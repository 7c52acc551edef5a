#include "sparse_pr/signal_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "sparse_pr/error.hpp"
#include "sparse_pr/format.hpp"

namespace spr {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::numeric_domain, std::string(what) + " contains non-finite entries");
  }
}

}  // namespace

SparseSignal::SparseSignal(Vector values) : values_(std::move(values)) {
  require_finite(values_, "signal");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0) {
      support_.push_back(static_cast<std::size_t>(i));
    }
  }
  norm2_ = values_.norm();
}

double SparseSignal::min_abs_nonzero() const noexcept {
  if (support_.empty()) {
    return 0.0;
  }
  double m = std::abs(values_[static_cast<Eigen::Index>(support_.front())]);
  for (std::size_t i : support_) {
    m = std::min(m, std::abs(values_[static_cast<Eigen::Index>(i)]));
  }
  return m;
}

double SparseSignal::max_abs() const noexcept {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

double SparseSignal::strength_constant() const noexcept {
  if (support_.empty() || norm2_ == 0.0) {
    return 0.0;
  }
  return std::sqrt(static_cast<double>(support_.size())) * min_abs_nonzero() / norm2_;
}

PhaselessDataset::PhaselessDataset(Matrix sensing, Vector observations, double sigma,
                                   std::uint64_t seed, std::size_t sparsity)
    : sensing_(std::move(sensing)),
      observations_(std::move(observations)),
      sigma_(sigma),
      seed_(seed),
      sparsity_(sparsity) {
  if (sensing_.rows() != observations_.size()) {
    throw InvalidParameter("dataset: " + std::to_string(observations_.size()) +
                           " observations for " + std::to_string(sensing_.rows()) +
                           " sensing rows");
  }
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
    throw InvalidParameter("dataset: sigma must be finite and >= 0");
  }
  require_finite(observations_, "observations");
  if (!sensing_.allFinite()) {
    throw Error(ErrorCode::numeric_domain, "sensing matrix contains non-finite entries");
  }
}

PhaselessDataset PhaselessDataset::subset(std::span<const std::size_t> rows) const {
  Matrix a(static_cast<Eigen::Index>(rows.size()), sensing_.cols());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= this->rows()) {
      throw InvalidParameter("dataset subset: row " + std::to_string(rows[r]) + " out of range");
    }
    const auto src = static_cast<Eigen::Index>(rows[r]);
    a.row(static_cast<Eigen::Index>(r)) = sensing_.row(src);
    y[static_cast<Eigen::Index>(r)] = observations_[src];
  }
  return PhaselessDataset(std::move(a), std::move(y), sigma_, seed_, sparsity_);
}

SparseSignal sample_signal(std::size_t n, std::size_t k, Rng& rng, MagnitudeRange range) {
  if (k == 0 || k > n) {
    throw InvalidParameter("sample_signal: need 1 <= k <= n (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
  }
  if (!(range.lo > 0.0) || !(range.hi >= range.lo)) {
    throw InvalidParameter("sample_signal: magnitude range must satisfy 0 < lo <= hi");
  }
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(support.begin(), support.end());

  Vector values = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i : support) {
    const double mag = rng.uniform(range.lo, range.hi);
    values[static_cast<Eigen::Index>(i)] = rng.sign() * mag;
  }
  return SparseSignal(std::move(values));
}

PhaselessDataset sample_dataset(const SparseSignal& signal, std::size_t m, double sigma, Rng& rng) {
  if (m == 0) {
    throw InvalidParameter("sample_dataset: m must be >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("sample_dataset: sigma must be finite and >= 0");
  }
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(signal.dim());
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index i = 0; i < cols; ++i) {
      a(j, i) = rng.normal();
    }
  }
  Vector y = (a * signal.values()).array().square();
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double eps = rng.normal();
    if (sigma > 0.0) {
      y[j] += sigma * eps;
    }
  }
  return PhaselessDataset(std::move(a), std::move(y), sigma, rng.seed(), signal.sparsity());
}

double magnitude_estimate(const PhaselessDataset& data) {
  if (data.rows() == 0) {
    throw InvalidParameter("magnitude_estimate: empty dataset");
  }
  return std::sqrt(std::max(0.0, data.observations().mean()));
}

Problem generate_problem(const ProblemSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  SparseSignal signal = sample_signal(spec.n, spec.k, rng, spec.range);
  const double sigma = spec.noise_relative ? spec.noise * signal.norm2() * signal.norm2() : spec.noise;
  if (!(sigma >= 0.0)) {
    throw InvalidParameter("generate_problem: noise level must be >= 0");
  }
  PhaselessDataset data = sample_dataset(signal, spec.m, sigma, rng);
  return Problem{std::move(signal), std::move(data)};
}

void write_dataset_csv(std::ostream& out, const PhaselessDataset& data, bool include_sensing) {
  out << "n,m,k,sigma,seed\n";
  out << data.dim() << ',' << data.rows() << ',' << data.sparsity() << ','
      << format_double(data.sigma()) << ',' << data.seed() << '\n';
  out << "y\n";
  for (Eigen::Index j = 0; j < data.observations().size(); ++j) {
    out << format_double(data.observations()[j]) << '\n';
  }
  if (include_sensing) {
    out << "sensing\n";
    const Matrix& a = data.sensing();
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      for (Eigen::Index i = 0; i < a.cols(); ++i) {
        if (i > 0) out << ',';
        out << format_double(a(j, i));
      }
      out << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

template <typename Int>
Int parse_integer(const std::string& text) {
  Int value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::io, "dataset csv: bad integer field '" + text + "'");
  }
  return value;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

PhaselessDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line) || line != "n,m,k,sigma,seed") {
    throw Error(ErrorCode::io, "dataset csv: missing header 'n,m,k,sigma,seed'");
  }
  if (!next_line(in, line)) {
    throw Error(ErrorCode::io, "dataset csv: missing parameter row");
  }
  const auto fields = split_fields(line);
  if (fields.size() != 5) {
    throw Error(ErrorCode::io, "dataset csv: parameter row needs 5 fields");
  }
  const auto n = parse_integer<std::size_t>(fields[0]);
  const auto m = parse_integer<std::size_t>(fields[1]);
  const auto k = parse_integer<std::size_t>(fields[2]);
  const double sigma = parse_double(fields[3]);
  const auto seed = parse_integer<std::uint64_t>(fields[4]);

  if (!next_line(in, line) || line != "y") {
    throw Error(ErrorCode::io, "dataset csv: missing 'y' block");
  }
  Vector y(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    if (!next_line(in, line)) {
      throw Error(ErrorCode::io, "dataset csv: expected " + std::to_string(m) + " observations");
    }
    y[static_cast<Eigen::Index>(j)] = parse_double(line);
  }

  if (next_line(in, line) && line == "sensing") {
    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < m; ++j) {
      if (!next_line(in, line)) {
        throw Error(ErrorCode::io, "dataset csv: truncated sensing block");
      }
      const auto row = split_fields(line);
      if (row.size() != n) {
        throw Error(ErrorCode::io, "dataset csv: sensing row " + std::to_string(j) + " has " +
                                       std::to_string(row.size()) + " fields, expected " +
                                       std::to_string(n));
      }
      for (std::size_t i = 0; i < n; ++i) {
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = parse_double(row[i]);
      }
    }
    return PhaselessDataset(std::move(a), std::move(y), sigma, seed, k);
  }

  if (k == 0) {
    throw Error(ErrorCode::io, "dataset csv: no sensing block and k=0, cannot regenerate");
  }
  ProblemSpec spec{n, k, m, sigma, false, {}};
  Problem regenerated = generate_problem(spec, seed);
  if (regenerated.data.observations() != y) {
    throw Error(ErrorCode::io, "dataset csv: observations do not match the regenerated dataset");
  }
  return std::move(regenerated.data);
}

}  // namespace spr
