#pragma once

#include <Eigen/Core>

namespace spr {

using Vector = Eigen::VectorXd;
/// Row j holds the sensing vector A_j.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace spr
