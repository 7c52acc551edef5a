#include "sparse_pr/empirical_risk.hpp"

#include <string>

#include "sparse_pr/error.hpp"

namespace spr {

RiskEvaluator::RiskEvaluator(const PhaselessDataset& data)
    : data_(&data),
      projections_(static_cast<Eigen::Index>(data.rows())),
      residual_weights_(static_cast<Eigen::Index>(data.rows())) {
  if (data.rows() == 0) {
    throw InvalidParameter("risk: empty dataset");
  }
}

void RiskEvaluator::project(const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != data_->dim()) {
    throw InvalidParameter("risk: iterate has dimension " + std::to_string(x.size()) +
                           ", dataset has " + std::to_string(data_->dim()));
  }
  projections_.noalias() = data_->sensing() * x;
}

double RiskEvaluator::value(const Vector& x) {
  project(x);
  const auto residual = projections_.array().square() - data_->observations().array();
  return residual.square().sum() / (4.0 * static_cast<double>(data_->rows()));
}

double RiskEvaluator::value_and_gradient(const Vector& x, Vector& grad) {
  project(x);
  const double m = static_cast<double>(data_->rows());
  residual_weights_ = projections_.array().square() - data_->observations().array();
  const double value = residual_weights_.squaredNorm() / (4.0 * m);
  residual_weights_.array() *= projections_.array();
  grad.resize(x.size());
  grad.noalias() = data_->sensing().transpose() * residual_weights_;
  grad /= m;
  return value;
}

double risk(const Vector& x, const PhaselessDataset& data) {
  RiskEvaluator eval(data);
  return eval.value(x);
}

Vector grad_risk(const Vector& x, const PhaselessDataset& data) {
  RiskEvaluator eval(data);
  Vector g;
  eval.value_and_gradient(x, g);
  return g;
}

RiskEvaluation evaluate_risk(const Vector& x, const PhaselessDataset& data, bool with_gradient) {
  RiskEvaluator eval(data);
  RiskEvaluation out;
  if (with_gradient) {
    Vector g;
    out.value = eval.value_and_gradient(x, g);
    out.gradient = std::move(g);
  } else {
    out.value = eval.value(x);
  }
  return out;
}

Vector population_grad(const Vector& x, const SparseSignal& xstar) {
  const Vector& ref = xstar.values();
  if (x.size() != ref.size()) {
    throw InvalidParameter("population_grad: dimension mismatch");
  }
  const double signal_sq = xstar.norm2() * xstar.norm2();
  return (3.0 * x.squaredNorm() - signal_sq) * x - 2.0 * x.dot(ref) * ref;
}

Coherence coherence_from_gradient(const Vector& grad, const Vector& x, const SparseSignal& xstar) {
  const SignedDistance nearest = nearest_sign(xstar.values(), x);
  if (grad.size() != x.size()) {
    throw InvalidParameter("coherence: gradient dimension mismatch");
  }
  const double value = grad.dot(x - static_cast<double>(nearest.sign) * xstar.values());
  return Coherence{value, nearest.sign};
}

Coherence coherence_inner_product(const Vector& x, const PhaselessDataset& data, const SparseSignal& xstar) {
  return coherence_from_gradient(grad_risk(x, data), x, xstar);
}

}  // namespace spr
