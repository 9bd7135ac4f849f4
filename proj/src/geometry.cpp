#include "edmcal/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace edmcal::geometry {

namespace {

void require_same_shape(const Matrix& x, const Matrix& xhat) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols())
    throw std::invalid_argument("point sets must have matching N and dimension");
  if (x.rows() < x.cols() + 1)
    throw std::invalid_argument("need at least dim+1 points for rigid-invariant metrics");
}

Matrix center_rows(const Matrix& x) {
  return x.rowwise() - x.colwise().mean();
}

}  // namespace

Matrix build_squared_distances(const Matrix& positions) {
  if (!positions.allFinite())
    throw std::invalid_argument("positions must be finite");
  const Eigen::Index n = positions.rows();
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (positions.row(i) - positions.row(j)).squaredNorm();
      m(i, j) = d2;
      m(j, i) = d2;
    }
  }
  return m;
}

Matrix centering_matrix(Eigen::Index n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix double_center(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("double_center expects a square matrix");
  const Eigen::Index n = m.rows();
  const Vector row_mean = m.rowwise().mean();
  const Vector col_mean = m.colwise().mean();
  const double grand_mean = m.mean();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = -0.5 * (m(i, j) - row_mean(i) - col_mean(j) + grand_mean);
  return out;
}

double calibration_error(const Matrix& x, const Matrix& xhat) {
  require_same_shape(x, xhat);
  const Matrix xc = center_rows(x);
  const Matrix yc = center_rows(xhat);
  const Matrix diff = xc * xc.transpose() - yc * yc.transpose();
  return diff.norm() / static_cast<double>(x.rows());
}

Matrix procrustes_align(const Matrix& x, const Matrix& xhat) {
  require_same_shape(x, xhat);
  const Matrix xc = center_rows(x);
  const Matrix yc = center_rows(xhat);
  // argmin over orthogonal R of ||yc R - xc||_F; reflections are rigid here.
  const Matrix cross = yc.transpose() * xc;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rot = svd.matrixU() * svd.matrixV().transpose();
  Matrix aligned = yc * rot;
  aligned.rowwise() += x.colwise().mean();
  return aligned;
}

double position_error(const Matrix& x, const Matrix& xhat) {
  const Matrix aligned = procrustes_align(x, xhat);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    total += (aligned.row(i) - x.row(i)).norm();
  return total / static_cast<double>(x.rows());
}

}  // namespace edmcal::geometry
