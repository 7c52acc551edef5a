#include "sparse_pr/md_solver.hpp"

#include <cmath>
#include <string>

#include "sparse_pr/empirical_risk.hpp"
#include "sparse_pr/mirror_geometry.hpp"
#include "sparse_pr/stopping.hpp"

namespace spr {

const char* to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::stopped_early: return "stopped_early";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidParameter("solver config: beta must be finite and > 0");
  }
  if (eta && (!(*eta > 0.0) || !std::isfinite(*eta))) {
    throw InvalidParameter("solver config: eta must be finite and > 0");
  }
  if (max_iters == 0) {
    throw InvalidParameter("solver config: max_iters must be >= 1");
  }
  if (record_every == 0) {
    throw InvalidParameter("solver config: record_every must be >= 1");
  }
}

DivergedError::DivergedError(std::size_t iteration, std::size_t coordinate, const std::string& detail)
    : Error(ErrorCode::diverged, "diverged at iteration " + std::to_string(iteration) + ", coordinate " +
                                     std::to_string(coordinate) + ": " + detail),
      iteration_(iteration),
      coordinate_(coordinate) {}

double default_step_size(const PhaselessDataset& data) {
  if (data.rows() == 0) {
    throw InvalidParameter("default_step_size: empty dataset");
  }
  const double mean = data.observations().mean();
  if (!(mean > 0.0)) {
    throw DegenerateData("default_step_size: mean observation is not positive");
  }
  return 0.3 / (mean * std::sqrt(mean));
}

std::size_t initial_coordinate(const PhaselessDataset& data) {
  if (data.rows() == 0 || data.dim() == 0) {
    throw InvalidParameter("initialize: empty dataset");
  }
  const Vector scores = data.sensing().cwiseAbs2().transpose() * data.observations();
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<Eigen::Index>(best)]) {
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

MirrorState initial_state(std::size_t n, std::size_t i0, double magnitude, double beta) {
  if (i0 >= n) {
    throw InvalidParameter("initial_state: coordinate out of range");
  }
  const HyperbolicMirrorMap map(beta);
  MirrorState state;
  state.primal = Vector::Zero(static_cast<Eigen::Index>(n));
  state.dual = Vector::Zero(static_cast<Eigen::Index>(n));
  const auto idx = static_cast<Eigen::Index>(i0);
  state.primal[idx] = magnitude / std::sqrt(3.0);
  state.dual[idx] = map.gradient(state.primal[idx]);
  return state;
}

EgState eg_initial_state(std::size_t n, std::size_t i0, double magnitude, double beta) {
  if (i0 >= n) {
    throw InvalidParameter("eg_initial_state: coordinate out of range");
  }
  if (!(beta > 0.0)) {
    throw InvalidParameter("eg_initial_state: beta must be > 0");
  }
  EgState state;
  state.u = Vector::Constant(static_cast<Eigen::Index>(n), beta / 2.0);
  state.v = state.u;
  const auto idx = static_cast<Eigen::Index>(i0);
  const double half_spike = magnitude / (2.0 * std::sqrt(3.0));
  const double root = std::sqrt(magnitude * magnitude / 12.0 + beta * beta / 4.0);
  state.u[idx] = half_spike + root;
  // -half_spike + root, written through the product u v = beta^2/4 to avoid cancellation.
  state.v[idx] = (beta * beta / 4.0) / state.u[idx];
  return state;
}

namespace {

double checked_magnitude(const PhaselessDataset& data) {
  const double theta = magnitude_estimate(data);
  if (!(theta > 0.0)) {
    throw DegenerateData("initialize: magnitude estimate is zero (mean observation <= 0)");
  }
  return theta;
}

}  // namespace

MirrorState initialize(const PhaselessDataset& data, double beta) {
  const double theta = checked_magnitude(data);
  return initial_state(data.dim(), initial_coordinate(data), theta, beta);
}

EgState eg_initialize(const PhaselessDataset& data, double beta) {
  const double theta = checked_magnitude(data);
  return eg_initial_state(data.dim(), initial_coordinate(data), theta, beta);
}

MirrorState md_step(const MirrorState& state, const Vector& grad, double eta, double beta) {
  if (grad.size() != state.dual.size()) {
    throw InvalidParameter("md_step: gradient dimension mismatch");
  }
  if (!(eta > 0.0)) {
    throw InvalidParameter("md_step: eta must be > 0");
  }
  const HyperbolicMirrorMap map(beta);
  MirrorState next;
  next.iteration = state.iteration + 1;
  next.dual = state.dual - eta * grad;
  next.primal.resize(next.dual.size());
  for (Eigen::Index i = 0; i < next.dual.size(); ++i) {
    const double s = next.dual[i];
    if (!(std::abs(s) <= kDualDivergenceLimit)) {
      throw DivergedError(next.iteration, static_cast<std::size_t>(i),
                          "mirror coordinate " + std::to_string(s) + " exceeds the sinh range");
    }
    next.primal[i] = map.inverse_gradient(s);
  }
  return next;
}

EgState eg_step(const EgState& state, const Vector& grad, double eta) {
  if (grad.size() != state.u.size() || state.v.size() != state.u.size()) {
    throw InvalidParameter("eg_step: dimension mismatch");
  }
  EgState next;
  next.iteration = state.iteration + 1;
  next.u = state.u.array() * (-eta * grad.array()).exp();
  next.v = state.v.array() * (eta * grad.array()).exp();
  for (Eigen::Index i = 0; i < next.u.size(); ++i) {
    const bool ok = std::isfinite(next.u[i]) && std::isfinite(next.v[i]) && next.u[i] > 0.0 && next.v[i] > 0.0;
    if (!ok) {
      throw DivergedError(next.iteration, static_cast<std::size_t>(i), "EG weight left the floating-point range");
    }
  }
  return next;
}

Trajectory run(const PhaselessDataset& data, const SolverConfig& config, const RunOptions& options) {
  config.validate();
  if (options.xstar && options.xstar->dim() != data.dim()) {
    throw InvalidParameter("run: signal dimension does not match the dataset");
  }
  if (options.holdout && options.holdout->dim() != data.dim()) {
    throw InvalidParameter("run: hold-out dimension does not match the dataset");
  }

  const HyperbolicMirrorMap map(config.beta);
  const double eta = config.eta ? *config.eta : default_step_size(data);

  Trajectory traj;
  traj.config = config;
  traj.config.eta = eta;
  traj.records.reserve(config.max_iters / config.record_every + 2);

  MirrorState state = initialize(data, config.beta);
  traj.initial_coordinate = initial_coordinate(data);

  RiskEvaluator train(data);
  std::optional<RiskEvaluator> holdout;
  if (options.holdout) {
    holdout.emplace(*options.holdout);
  }

  Vector grad;
  for (std::size_t t = 0;; ++t) {
    const double value = train.value_and_gradient(state.primal, grad);
    const bool last = t == config.max_iters;
    if (t % config.record_every == 0 || last) {
      TrajectoryRecord rec;
      rec.t = t;
      rec.risk = value;
      if (options.xstar) {
        const SparseSignal& xs = *options.xstar;
        const Coherence coh = coherence_from_gradient(grad, state.primal, xs);
        rec.dist = nearest_sign(xs.values(), state.primal).value;
        rec.dist_phi = dist_phi_signset(xs, state.primal, map);
        rec.off_support_l1 = off_support_mass(state.primal, xs.support());
        rec.coherence = coh.value;
        rec.coherence_sign = coh.sign;
      }
      if (holdout) {
        rec.holdout_risk = holdout->value(state.primal);
      }
      if (config.record_full_iterates) {
        rec.iterate = state.primal;
      }
      traj.records.push_back(std::move(rec));
    }
    if (options.observer && !options.observer(t, state.primal)) {
      traj.status = RunStatus::stopped_early;
      traj.terminated_at = t;
      break;
    }
    if (last) {
      break;
    }
    try {
      state = md_step(state, grad, eta, config.beta);
    } catch (DivergedError& e) {
      traj.status = RunStatus::diverged;
      traj.terminated_at = e.iteration();
      e.attach(std::move(traj));
      throw;
    }
  }
  return traj;
}

}  // namespace spr
