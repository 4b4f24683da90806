#pragma once

#include <Eigen/Core>

namespace rdbridge {

using Vector = Eigen::VectorXd;
// Rows index the source alphabet, columns the reconstruction alphabet.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

}  // namespace rdbridge
