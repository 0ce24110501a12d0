#pragma once

#include <Eigen/Dense>

namespace etmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace etmpc
