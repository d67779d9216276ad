#pragma once

#include <Eigen/Dense>

namespace filtop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace filtop
