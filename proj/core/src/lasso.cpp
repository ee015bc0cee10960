#include <algorithm>
#include <cmath>
#include <limits>

#include "agnostic/error.hpp"
#include "agnostic/linalg.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

Vector SelectedModel::predict(const Matrix& x) const {
  Vector out = x * beta_hat;
  out.array() += intercept;
  return out;
}

SelectedModel model_from_coefficients(Vector beta, double intercept, double null_intercept,
                                      std::string selector_id) {
  SelectedModel model;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) model.subset.push_back(j);
  }
  model.beta_hat = std::move(beta);
  model.intercept = intercept;
  model.null_intercept = null_intercept;
  model.selector_id = std::move(selector_id);
  return model;
}

// ---------------------------------------------------------------------------
// LassoProblem

LassoProblem::LassoProblem(const Matrix& x, const Vector& y, bool intercept)
    : m_(x.rows()), intercept_(intercept) {
  require(x.rows() == y.size(), "design and response lengths differ");
  require(x.rows() >= 1, "lasso needs at least one row");
  const Index p = x.cols();
  if (intercept) {
    shift_ = x.colwise().mean().transpose();
    y_shift_ = y.mean();
  } else {
    shift_ = Vector::Zero(p);
    y_shift_ = 0.0;
  }
  const Matrix xs = x.rowwise() - shift_.transpose();
  const Vector ys = y.array() - y_shift_;
  sum_x_ = xs.colwise().sum().transpose();
  sum_y_ = ys.sum();
  sum_xx_ = xs.transpose() * xs;
  sum_xy_ = xs.transpose() * ys;
  sum_yy_ = ys.squaredNorm();
  finalize();
}

LassoProblem LassoProblem::augmented(const Eigen::Ref<const Vector>& x_new, double y_new) const {
  require(x_new.size() == p(), "x_new has the wrong length");
  LassoProblem out = *this;
  const Vector xs = x_new - shift_;
  const double ys = y_new - y_shift_;
  out.m_ = m_ + 1;
  out.sum_x_ += xs;
  out.sum_y_ += ys;
  out.sum_xx_.noalias() += xs * xs.transpose();
  out.sum_xy_ += xs * ys;
  out.sum_yy_ += ys * ys;
  out.finalize();
  return out;
}

void LassoProblem::finalize() {
  const double m = static_cast<double>(m_);
  if (intercept_) {
    x_mean_ = sum_x_ / m;
    y_mean_ = sum_y_ / m;
    gram_ = (sum_xx_ - m * x_mean_ * x_mean_.transpose()) / m;
    xty_ = (sum_xy_ - m * x_mean_ * y_mean_) / m;
    yty_ = (sum_yy_ - m * y_mean_ * y_mean_) / m;
  } else {
    x_mean_ = Vector::Zero(sum_x_.size());
    y_mean_ = 0.0;
    gram_ = sum_xx_ / m;
    xty_ = sum_xy_ / m;
    yty_ = sum_yy_ / m;
  }
}

double LassoProblem::lambda_max() const {
  return xty_.size() == 0 ? 0.0 : xty_.cwiseAbs().maxCoeff();
}

double LassoProblem::empirical_risk(const Vector& beta) const {
  const double risk = yty_ - 2.0 * xty_.dot(beta) + beta.dot(gram_ * beta);
  return std::max(0.0, risk);
}

double LassoProblem::objective(const Vector& beta, double lambda) const {
  return 0.5 * empirical_risk(beta) + lambda * beta.lpNorm<1>();
}

double LassoProblem::intercept_for(const Vector& beta) const {
  if (!intercept_) return 0.0;
  return (y_mean_ + y_shift_) - (x_mean_ + shift_).dot(beta);
}

// ---------------------------------------------------------------------------
// Coordinate descent

LassoFit solve_lasso(const LassoProblem& problem, double lambda, const LassoOptions& options,
                     const Vector* warm_start) {
  require(lambda >= 0.0, "lambda must be nonnegative");
  const Index p = problem.p();
  const Matrix& gram = problem.gram();
  const Vector& xty = problem.xty();

  Vector beta = warm_start ? *warm_start : Vector::Zero(p);
  require(beta.size() == p, "warm start has the wrong length");
  Vector grad = gram * beta;  // G β, kept in sync with every coordinate move

  const double max_diag = p > 0 ? gram.diagonal().maxCoeff() : 0.0;
  const double diag_floor = 1e-12 * std::max(max_diag, 0.0);

  LassoFit fit;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double gjj = gram(j, j);
      double next = 0.0;
      if (gjj > diag_floor && gjj > 0.0) {
        const double z = xty(j) - (grad(j) - gjj * beta(j));
        next = soft_threshold(z, lambda) / gjj;
      }
      const double delta = next - beta(j);
      if (delta != 0.0) {
        grad.noalias() += gram.col(j) * delta;
        beta(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < options.tolerance) {
      fit.sweeps = sweep;
      fit.intercept = problem.intercept_for(beta);
      fit.beta = std::move(beta);
      return fit;
    }
  }
  fail(ErrorCode::NonConvergence, "coordinate descent did not converge within " +
                                      std::to_string(options.max_sweeps) + " sweeps at lambda " +
                                      std::to_string(lambda));
}

LassoFit lasso_penalized(const Dataset& data, double lambda, const LassoOptions& options) {
  const LassoProblem problem(data.x(), data.y(), options.intercept);
  return solve_lasso(problem, lambda, options);
}

LassoPath lasso_path(const Dataset& data, int k_lambdas, double lambda_min_ratio,
                     const LassoOptions& options) {
  require(k_lambdas >= 1, "k_lambdas must be positive");
  require(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0, "lambda_min_ratio must lie in (0, 1)");
  const LassoProblem problem(data.x(), data.y(), options.intercept);
  const double lmax = problem.lambda_max();
  if (!(lmax > 0.0)) {
    fail(ErrorCode::FitFailure, "lambda_max is zero: response is uncorrelated with every column");
  }

  LassoPath path;
  Vector warm = Vector::Zero(problem.p());
  for (int k = 0; k < k_lambdas; ++k) {
    const double frac = k_lambdas == 1 ? 0.0 : static_cast<double>(k) / (k_lambdas - 1);
    const double lambda = lmax * std::pow(lambda_min_ratio, frac);
    LassoFit fit;
    try {
      fit = solve_lasso(problem, lambda, options, &warm);
    } catch (const Error& e) {
      fail(e.code(), std::string(e.what()) + " (path index " + std::to_string(k) + ")");
    }
    warm = fit.beta;
    path.lambdas.push_back(lambda);
    path.l1_norms.push_back(fit.beta.lpNorm<1>());
    path.intercepts.push_back(fit.intercept);
    path.sweeps.push_back(fit.sweeps);
    path.betas.push_back(std::move(fit.beta));
  }
  return path;
}

// ---------------------------------------------------------------------------
// ℓ1-ball constrained form

SelectedModel lasso_constrained(const Dataset& data, double l1_budget,
                                const ConstrainedOptions& options) {
  require(l1_budget > 0.0, "l1 budget must be positive");
  const LassoProblem problem(data.x(), data.y(), false);
  const double null_intercept = data.y().mean();

  auto finish = [&](Vector beta, double lambda, std::string rule) {
    SelectedModel model =
        model_from_coefficients(std::move(beta), 0.0, null_intercept, "lasso-constrained");
    model.diagnostics.lambda = lambda;
    model.diagnostics.lambda_rule = std::move(rule);
    return model;
  };

  // Unconstrained minimizer first; if it is already inside B(L) it is the answer.
  if (data.n() > data.p()) {
    Eigen::ColPivHouseholderQR<Matrix> qr(data.x());
    if (qr.rank() == data.p()) {
      Vector ols = qr.solve(data.y());
      if (ols.lpNorm<1>() <= l1_budget) return finish(std::move(ols), 0.0, "unconstrained");
    }
  }

  const double lmax = problem.lambda_max();
  if (!(lmax > 0.0)) return finish(Vector::Zero(problem.p()), 0.0, "unconstrained");

  // Bracket the budget by walking the penalty down a decade at a time with warm
  // starts. If even a vanishing penalty stays inside the ball (rank-deficient
  // design), any such solution is a constrained minimizer.
  Vector warm = Vector::Zero(problem.p());
  double hi = lmax;
  double norm_hi = 0.0;
  double lo = 0.0;
  double norm_lo = std::numeric_limits<double>::infinity();
  for (int decade = 1; decade <= 10; ++decade) {
    const double lambda = lmax * std::pow(10.0, -decade);
    LassoFit fit = solve_lasso(problem, lambda, options.solver, &warm);
    const double norm = fit.beta.lpNorm<1>();
    warm = fit.beta;
    if (norm > l1_budget) {
      lo = lambda;
      norm_lo = norm;
      break;
    }
    if (decade == 10) return finish(std::move(fit.beta), lambda, "unconstrained-nonunique");
    hi = lambda;
    norm_hi = norm;
  }

  const double tol = options.norm_tolerance;
  Vector best;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0;
  for (int iter = 0; iter < options.max_bisections; ++iter) {
    const double mid = 0.5 * (lo + hi);
    LassoFit fit = solve_lasso(problem, mid, options.solver, &warm);
    const double norm = fit.beta.lpNorm<1>();
    if (norm > norm_lo + 1e-9 || norm < norm_hi - 1e-9) {
      fail(ErrorCode::BisectionFailure,
           "l1 norm is not monotone in lambda near " + std::to_string(mid) +
               " (solver tolerance too loose?)");
    }
    if (std::abs(norm - l1_budget) <= tol) return finish(std::move(fit.beta), mid, "l1-budget");
    if (std::abs(norm - l1_budget) < best_gap) {
      best_gap = std::abs(norm - l1_budget);
      best = fit.beta;
      best_lambda = mid;
    }
    if (norm > l1_budget) {
      lo = mid;
      norm_lo = norm;
    } else {
      hi = mid;
      norm_hi = norm;
    }
    warm = std::move(fit.beta);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  // Penalty resolution exhausted: accept the closest probe if it meets the contract.
  if (best_gap <= 1e-6) return finish(std::move(best), best_lambda, "l1-budget");
  fail(ErrorCode::BisectionFailure,
       "bisection could not bring the l1 norm within " + std::to_string(tol) + " of the budget " +
           std::to_string(l1_budget));
}

}  // namespace agnostic
