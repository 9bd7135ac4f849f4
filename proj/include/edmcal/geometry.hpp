#pragma once

#include <Eigen/Dense>

namespace edmcal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace geometry {

/// Squared pairwise distances of the rows of `positions` (N x dim).
/// Result is symmetric with an exactly-zero diagonal.
Matrix build_squared_distances(const Matrix& positions);

/// The centering projector J = I - (1/N) * ones.
Matrix centering_matrix(Eigen::Index n);

/// Classical-MDS transform -1/2 * J * M * J of a symmetric matrix.
Matrix double_center(const Matrix& m);

/// Rigid-invariant discrepancy (1/N) * ||J X X^T J - J Xhat Xhat^T J||_F
/// between two point sets. Zero exactly on rigid orbits
/// (translation / rotation / reflection). Units: squared length.
double calibration_error(const Matrix& x, const Matrix& xhat);

/// Aligns `xhat` onto `x` by optimal translation plus orthogonal transform
/// (reflections allowed) and returns the aligned copy.
Matrix procrustes_align(const Matrix& x, const Matrix& xhat);

/// Mean per-point displacement (1/N) * sum ||xhat_n - x_n|| after Procrustes
/// alignment. Units: length.
double position_error(const Matrix& x, const Matrix& xhat);

}  // namespace geometry
}  // namespace edmcal
