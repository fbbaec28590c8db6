#pragma once

#include <Eigen/Core>

namespace mmp_nlp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Floor applied to Lipschitz constants that would otherwise be zero (affine data).
inline constexpr double kLipschitzFloor = 1e-8;

}  // namespace mmp_nlp
