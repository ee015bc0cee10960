#pragma once

#include <vector>

#include "agnostic/data.hpp"

namespace agnostic::linalg {

/// [1, X_S] for the listed columns.
Matrix design_with_intercept(const Matrix& x, const std::vector<Index>& subset);

/// Ratio of extreme singular values of `a`, squared: the condition number of aᵀa.
double gram_condition_number(const Matrix& a);

struct LeastSquares {
  Vector coef;
  Vector fitted;
  Vector residuals;
  double rss = 0.0;
};

/// Least squares via column-pivoting QR. Throws SingularDesign when the
/// design is rank deficient.
LeastSquares least_squares(const Matrix& design, const Vector& y);

/// I - H for the column space of `design` (rank-revealing, so rank-deficient
/// designs project onto their numerical column space).
Matrix residual_maker(const Matrix& design);

}  // namespace agnostic::linalg
