#pragma once

#include <optional>

#include "sparse_pr/mirror_geometry.hpp"
#include "sparse_pr/signal_model.hpp"
#include "sparse_pr/types.hpp"

namespace spr {

struct RiskEvaluation {
  double value = 0.0;
  std::optional<Vector> gradient;
};

/// Evaluates F(x) = 1/(4m) sum_j ((A_j x)^2 - Y_j)^2 and optionally
///   grad F(x) = 1/m sum_j ((A_j x)^2 - Y_j) (A_j x) A_j
/// against a fixed dataset, reusing its scratch buffer across calls.
///
/// Accumulation order is fixed (matrix-vector products over the row-major
/// sensing matrix), so repeated evaluations are bit-identical on one thread.
class RiskEvaluator {
 public:
  explicit RiskEvaluator(const PhaselessDataset& data);

  double value(const Vector& x);
  /// Writes the gradient into `grad` (resized as needed) and returns F(x).
  double value_and_gradient(const Vector& x, Vector& grad);

 private:
  void project(const Vector& x);

  const PhaselessDataset* data_;
  Vector projections_;
  Vector residual_weights_;
};

double risk(const Vector& x, const PhaselessDataset& data);
Vector grad_risk(const Vector& x, const PhaselessDataset& data);
RiskEvaluation evaluate_risk(const Vector& x, const PhaselessDataset& data, bool with_gradient);

/// E[grad F(x)] for Gaussian sensing: (3||x||^2 - ||x*||^2) x - 2 (x . x*) x*.
Vector population_grad(const Vector& x, const SparseSignal& xstar);

struct Coherence {
  double value;
  /// Sign of the reference point +-x* nearest to x in l2 (ties to +1).
  int sign;
};

/// <grad F(x), x - s x*> where s x* is the nearer of +-x*.
Coherence coherence_inner_product(const Vector& x, const PhaselessDataset& data, const SparseSignal& xstar);
/// Same quantity with a gradient already in hand.
Coherence coherence_from_gradient(const Vector& grad, const Vector& x, const SparseSignal& xstar);

}  // namespace spr
