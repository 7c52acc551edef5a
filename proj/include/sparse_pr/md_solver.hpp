#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "sparse_pr/error.hpp"
#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/trajectory.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

/// Iterate kept in the mirror (dual) domain: dual = grad Phi(primal), i.e.
/// dual_i = asinh(primal_i / beta) and primal_i = beta sinh(dual_i).
struct MirrorState {
  Vector dual;
  Vector primal;
  std::size_t iteration = 0;
};

/// EG+- weights; the primal iterate is u - v. Initialization gives
/// u_i v_i = beta^2 / 4 and the multiplicative update keeps the product fixed.
struct EgState {
  Vector u;
  Vector v;
  std::size_t iteration = 0;

  Vector primal() const { return u - v; }
};

/// |dual_i| above this is treated as divergence (beta sinh overflows past ~710).
inline constexpr double kDualDivergenceLimit = 700.0;

class DivergedError : public Error {
 public:
  DivergedError(std::size_t iteration, std::size_t coordinate, const std::string& detail);

  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t coordinate() const noexcept { return coordinate_; }
  /// Records up to the failure. Empty when thrown from a single step.
  const Trajectory& partial() const noexcept { return partial_; }
  void attach(Trajectory partial) { partial_ = std::move(partial); }

 private:
  std::size_t iteration_;
  std::size_t coordinate_;
  Trajectory partial_;
};

/// 0.3 / mean(Y)^{3/2}. Throws DegenerateData if mean(Y) <= 0.
double default_step_size(const PhaselessDataset& data);

/// argmax_i (1/m) sum_j Y_j A_ji^2, smallest index on ties.
std::size_t initial_coordinate(const PhaselessDataset& data);

/// Single-spike state: primal[i0] = magnitude / sqrt(3), zero elsewhere.
MirrorState initial_state(std::size_t n, std::size_t i0, double magnitude, double beta);
/// EG+- counterpart of `initial_state`; magnitude 0 gives u = v = beta/2.
EgState eg_initial_state(std::size_t n, std::size_t i0, double magnitude, double beta);

/// Single-coordinate initialization from the data. Throws
/// DegenerateData when the magnitude estimate is 0.
MirrorState initialize(const PhaselessDataset& data, double beta);
EgState eg_initialize(const PhaselessDataset& data, double beta);

/// grad Phi(X^{t+1}) = grad Phi(X^t) - eta grad F(X^t), carried out on `dual`.
MirrorState md_step(const MirrorState& state, const Vector& grad, double eta, double beta);
/// u <- u exp(-eta g), v <- v exp(eta g).
EgState eg_step(const EgState& state, const Vector& grad, double eta);

/// Invoked with every iterate X^t, t = 0..max_iters, after it is recorded.
/// Returning false ends the run early (status `stopped_early`).
using IterateObserver = std::function<bool(std::size_t t, const Vector& iterate)>;

struct RunOptions {
  /// Enables dist, dist_phi, off_support_l1 and coherence in the records.
  const SparseSignal* xstar = nullptr;
  /// Enables holdout_risk in the records.
  const PhaselessDataset* holdout = nullptr;
  IterateObserver observer;
};

/// Runs mirror descent from `initialize(data, beta)` for `config.max_iters`
/// steps. Records are taken at every multiple of `record_every` and at the
/// final iterate. Throws DivergedError with the partial trajectory attached.
Trajectory run(const PhaselessDataset& data, const SolverConfig& config, const RunOptions& options = {});

}  // namespace spr
