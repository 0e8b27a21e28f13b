#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

namespace safe_oco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace safe_oco
