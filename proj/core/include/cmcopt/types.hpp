#pragma once

#include <Eigen/Dense>

namespace cmcopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace cmcopt
