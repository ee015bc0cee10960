#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agnostic/data.hpp"
#include "agnostic/error.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

enum class PredictorKind { Mean, OlsFull, OlsSubset, Lasso, Custom };

/// Fit on (train_x, train_y), return predictions at the rows of query_x. Must
/// treat training rows symmetrically for the conformal guarantee to hold.
using CustomFitter =
    std::function<Vector(const Matrix& train_x, const Vector& train_y, const Matrix& query_x)>;

struct PredictorSpec {
  PredictorKind kind = PredictorKind::OlsFull;
  std::vector<Index> subset;  // OlsSubset
  double lambda = 0.0;        // Lasso (intercept unpenalized)
  std::string custom_id;
  CustomFitter custom;

  static PredictorSpec mean() { return {PredictorKind::Mean, {}, 0.0, {}, {}}; }
  static PredictorSpec ols_full() { return {PredictorKind::OlsFull, {}, 0.0, {}, {}}; }
  static PredictorSpec ols_subset(std::vector<Index> s) {
    return {PredictorKind::OlsSubset, std::move(s), 0.0, {}, {}};
  }
  static PredictorSpec lasso(double lambda) { return {PredictorKind::Lasso, {}, lambda, {}, {}}; }
  static PredictorSpec custom_fitter(std::string id, CustomFitter fn) {
    return {PredictorKind::Custom, {}, 0.0, std::move(id), std::move(fn)};
  }

  std::string label() const;
};

struct GridSpec {
  int points = 1000;      // rounded up to an odd count so the forecast is a grid point
  int max_doublings = 10;
  std::optional<double> half_width;  // initial half-width override
};

struct ConformalResult {
  std::vector<double> grid;
  std::vector<double> p_values;
  double lo = 0.0;
  double hi = 0.0;
  double length = 0.0;
  double alpha = 0.0;
  Vector x_new;
  double center = 0.0;      // point forecast from the training fit
  double half_width = 0.0;  // final grid half-width
  double step = 0.0;
  int doublings = 0;
  bool empty_accepted = false;  // no grid point reached alpha; hull is the best point ± step
};

/// Raised when the doubling cap is hit with an endpoint still accepted.
class UnboundedIntervalError : public Error {
 public:
  UnboundedIntervalError(const std::string& message, ConformalResult widest)
      : Error(ErrorCode::UnboundedInterval, message), widest_(std::move(widest)) {}
  const ConformalResult& widest() const noexcept { return widest_; }

 private:
  ConformalResult widest_;
};

/// Full-conformal p-value: fraction of the n+1 augmented residuals with
/// |e_i| >= |e_{n+1}| (ties inclusive).
double conformal_pvalue(const Dataset& data, const Vector& x_new, double y_trial,
                        const PredictorSpec& predictor);

/// Grid inversion of {y : p(y) >= alpha}; returns the convex hull of the
/// accepted grid points widened by one grid step on each side.
ConformalResult conformal_interval(const Dataset& data, const Vector& x_new, double alpha,
                                   const PredictorSpec& predictor, const GridSpec& grid = {});

struct LambdaChoice {
  double lambda = 0.0;
  std::size_t index = 0;
  ConformalResult result;
  std::vector<double> lengths;  // per path λ; +inf where the interval was unbounded
};

/// Shortest conformal interval over the λ values of a lasso path (ties → larger λ).
LambdaChoice choose_lambda_by_length(const Dataset& data, const Vector& x_new, double alpha,
                                     const LassoPath& path, const GridSpec& grid = {});

/// length(S \ {j}) − length(S) for each j in `base_subset` under OLS-subset predictors.
std::map<Index, double> variable_effect_lengths(const Dataset& data, const Vector& x_new,
                                                double alpha,
                                                const std::vector<Index>& base_subset,
                                                const GridSpec& grid = {});

}  // namespace agnostic
