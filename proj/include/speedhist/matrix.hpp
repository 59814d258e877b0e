#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace speedhist {

// Dense row-major double matrix. All model math is double precision.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace speedhist
