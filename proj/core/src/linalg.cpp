#include "agnostic/linalg.hpp"

#include <limits>

#include "agnostic/error.hpp"

namespace agnostic::linalg {

Matrix design_with_intercept(const Matrix& x, const std::vector<Index>& subset) {
  Matrix design(x.rows(), static_cast<Index>(subset.size()) + 1);
  design.col(0).setOnes();
  for (std::size_t k = 0; k < subset.size(); ++k) {
    design.col(static_cast<Index>(k) + 1) = x.col(subset[k]);
  }
  return design;
}

double gram_condition_number(const Matrix& a) {
  if (a.cols() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  const double ratio = smax / smin;
  return ratio * ratio;
}

LeastSquares least_squares(const Matrix& design, const Vector& y) {
  require(design.rows() == y.size(), "design and response lengths differ");
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols()) {
    fail(ErrorCode::SingularDesign, "design matrix is rank deficient (rank " +
                                        std::to_string(qr.rank()) + " < " +
                                        std::to_string(design.cols()) + ")");
  }
  LeastSquares out;
  out.coef = qr.solve(y);
  out.fitted = design * out.coef;
  out.residuals = y - out.fitted;
  out.rss = out.residuals.squaredNorm();
  return out;
}

Matrix residual_maker(const Matrix& design) {
  const Index rows = design.rows();
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(rows, rank);
  Matrix m = Matrix::Identity(rows, rows);
  m.noalias() -= q * q.transpose();
  return m;
}

}  // namespace agnostic::linalg
