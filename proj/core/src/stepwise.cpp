#include <algorithm>
#include <cmath>
#include <limits>

#include "agnostic/error.hpp"
#include "agnostic/linalg.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

std::vector<double> cv_lasso_errors(const Dataset& data, const std::vector<double>& lambdas,
                                    int folds) {
  const Index m = data.n();
  require(folds >= 2, "cross-validation needs at least two folds");
  require(m >= 2 * folds, "cross-validation needs at least two rows per fold");

  const auto fold_count = static_cast<std::size_t>(folds);
  std::vector<std::vector<double>> fold_sse(fold_count, std::vector<double>(lambdas.size(), 0.0));

  parallel_for(fold_count, [&](std::size_t f) {
    std::vector<Index> train_rows;
    std::vector<Index> test_rows;
    for (Index i = 0; i < m; ++i) {
      (static_cast<std::size_t>(i) % fold_count == f ? test_rows : train_rows).push_back(i);
    }
    const Dataset train = data.rows(train_rows);
    const Dataset test = data.rows(test_rows);
    const LassoProblem problem(train.x(), train.y(), true);
    Vector warm = Vector::Zero(problem.p());
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      LassoFit fit = solve_lasso(problem, lambdas[k], LassoOptions{}, &warm);
      Vector resid = test.y() - test.x() * fit.beta;
      resid.array() -= fit.intercept;
      fold_sse[f][k] = resid.squaredNorm();
      warm = std::move(fit.beta);
    }
  });

  std::vector<double> errors(lambdas.size(), 0.0);
  for (std::size_t f = 0; f < fold_count; ++f) {
    for (std::size_t k = 0; k < lambdas.size(); ++k) errors[k] += fold_sse[f][k];
  }
  for (double& e : errors) e /= static_cast<double>(m);
  return errors;
}

double cv_lasso_sigma2(const Dataset& data, int k_lambdas, double lambda_min_ratio) {
  const LassoPath path = lasso_path(data, k_lambdas, lambda_min_ratio);
  const std::vector<double> errors = cv_lasso_errors(data, path.lambdas);
  return *std::min_element(errors.begin(), errors.end());
}

double estimate_sigma2(const Dataset& data, std::optional<double> user_sigma2,
                       std::string& source) {
  if (user_sigma2) {
    require(*user_sigma2 > 0.0, "user-supplied sigma^2 must be positive");
    source = "user";
    return *user_sigma2;
  }
  const Index m = data.n();
  const Index p = data.p();
  if (m > p + 1) {
    std::vector<Index> all(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
    try {
      const auto fit = linalg::least_squares(linalg::design_with_intercept(data.x(), all), data.y());
      source = "ols";
      return fit.rss / static_cast<double>(m - p - 1);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularDesign) throw;
    }
  }
  if (m >= 20) {
    source = "cv-lasso";
    return cv_lasso_sigma2(data);
  }
  fail(ErrorCode::SigmaUnavailable,
       "cannot estimate sigma^2 (m = " + std::to_string(m) + ", p = " + std::to_string(p) +
           "); supply it explicitly");
}

std::pair<SelectedModel, CpTrace> forward_stepwise(const Dataset& data,
                                                   const StepwiseOptions& options) {
  const Index m = data.n();
  const Index p = data.p();
  if (m < 3) fail(ErrorCode::DatasetTooSmall, "forward stepwise needs at least 3 rows");
  const Index step_cap = std::min(p, m - 2);
  const Index max_steps = options.max_steps.value_or(step_cap);
  require(max_steps >= 0 && max_steps <= step_cap,
          "max_steps must lie in [0, min(p, m - 2)] = [0, " + std::to_string(step_cap) + "]");

  CpTrace trace;
  trace.sigma2_hat = estimate_sigma2(data, options.sigma2, trace.sigma2_source);

  // Working copies: centered columns, progressively orthogonalized against the
  // selected directions (modified Gram-Schmidt), and the current residual.
  Matrix z = data.x().rowwise() - data.x().colwise().mean();
  const Vector col_norm2 = z.colwise().squaredNorm().transpose();
  Vector r = data.y().array() - data.y().mean();

  std::vector<bool> used(static_cast<std::size_t>(p), false);
  trace.rss.push_back(r.squaredNorm());

  for (Index step = 0; step < max_steps; ++step) {
    Index best = -1;
    double best_drop = -1.0;
    for (Index j = 0; j < p; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double zz = z.col(j).squaredNorm();
      if (!(zz > 1e-10 * col_norm2(j)) || !(zz > 0.0)) continue;  // collinear with the model
      const double zr = z.col(j).dot(r);
      const double drop = zr * zr / zz;
      if (drop > best_drop) {
        best_drop = drop;
        best = j;
      }
    }
    if (best < 0) break;

    used[static_cast<std::size_t>(best)] = true;
    trace.order.push_back(best);
    const Vector q = z.col(best) / z.col(best).norm();
    r -= q * q.dot(r);
    trace.rss.push_back(std::min(trace.rss.back(), r.squaredNorm()));
    for (Index j = 0; j < p; ++j) {
      if (!used[static_cast<std::size_t>(j)]) z.col(j) -= q * q.dot(z.col(j));
    }
  }

  // An exact fit would make σ̂² zero; floor it relative to the total variation.
  const double tss = trace.rss.front();
  const double sigma2 = std::max(
      {trace.sigma2_hat, 1e-12 * tss / static_cast<double>(m), std::numeric_limits<double>::min()});

  for (std::size_t k = 0; k < trace.rss.size(); ++k) {
    trace.cp.push_back(trace.rss[k] / sigma2 + 2.0 * static_cast<double>(k) -
                       static_cast<double>(m));
  }
  trace.chosen_k = static_cast<Index>(
      std::min_element(trace.cp.begin(), trace.cp.end()) - trace.cp.begin());

  SelectedModel model;
  model.selector_id = "stepwise";
  model.subset.assign(trace.order.begin(), trace.order.begin() + trace.chosen_k);
  model.beta_hat = Vector::Zero(p);
  model.null_intercept = data.y().mean();
  const auto fit = linalg::least_squares(linalg::design_with_intercept(data.x(), model.subset),
                                         data.y());
  model.intercept = fit.coef(0);
  for (std::size_t k = 0; k < model.subset.size(); ++k) {
    model.beta_hat(model.subset[k]) = fit.coef(static_cast<Index>(k) + 1);
  }
  model.diagnostics.cp = trace;
  return {std::move(model), std::move(trace)};
}

}  // namespace agnostic
