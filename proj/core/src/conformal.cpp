#include "agnostic/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "agnostic/linalg.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/stats.hpp"

namespace agnostic {

std::string PredictorSpec::label() const {
  switch (kind) {
    case PredictorKind::Mean: return "mean";
    case PredictorKind::OlsFull: return "ols";
    case PredictorKind::OlsSubset: return "ols-subset";
    case PredictorKind::Lasso: return "lasso";
    case PredictorKind::Custom: return custom_id.empty() ? "custom" : custom_id;
  }
  return "unknown";
}

namespace {

// Residuals of the predictor refit on the augmented sample (X_1..X_n, x_new)
// with responses (Y_1..Y_n, y). Linear smoothers use e(y) = M[Y; 0] + M e_{n+1} y
// with M = I − H of the augmented design, which is exactly the refit.
class AugmentedResiduals {
 public:
  AugmentedResiduals(const Dataset& data, const Vector& x_new, const PredictorSpec& spec)
      : data_(data), x_new_(x_new), spec_(spec) {
    require(x_new.size() == data.p(), "x_new must have one entry per column");
    const Index n = data.n();
    switch (spec.kind) {
      case PredictorKind::Mean:
      case PredictorKind::OlsFull:
      case PredictorKind::OlsSubset: {
        std::vector<Index> cols;
        if (spec.kind == PredictorKind::OlsFull) {
          for (Index j = 0; j < data.p(); ++j) cols.push_back(j);
        } else if (spec.kind == PredictorKind::OlsSubset) {
          cols = spec.subset;
          std::set<Index> seen;
          for (Index j : cols) {
            require(j >= 0 && j < data.p() && seen.insert(j).second,
                    "ols_subset indices must be valid and distinct");
          }
        }
        Matrix aug_x(n + 1, data.p());
        aug_x.topRows(n) = data.x();
        aug_x.row(n) = x_new.transpose();
        const Matrix design = linalg::design_with_intercept(aug_x, cols);
        Eigen::ColPivHouseholderQR<Matrix> qr(design);
        if (qr.rank() < design.cols()) {
          fail(ErrorCode::FitFailure, "augmented design for '" + spec.label() +
                                          "' is singular (" + std::to_string(design.cols()) +
                                          " parameters, " + std::to_string(n + 1) + " rows)");
        }
        const Matrix resid_maker = linalg::residual_maker(design);
        offset_ = resid_maker.leftCols(n) * data.y();
        slope_ = resid_maker.col(n);

        const Matrix train_design = design.topRows(n);
        Eigen::ColPivHouseholderQR<Matrix> train_qr(train_design);
        const Vector coef = train_qr.solve(data.y());
        center_ = design.row(n).dot(coef);
        train_residuals_ = data.y() - train_design * coef;
        break;
      }
      case PredictorKind::Lasso: {
        require(spec.lambda >= 0.0, "lasso predictor needs lambda >= 0");
        problem_.emplace(data.x(), data.y(), true);
        train_fit_ = solve_lasso(*problem_, spec.lambda, LassoOptions{});
        center_ = train_fit_.intercept + x_new.dot(train_fit_.beta);
        train_residuals_ = data.y() - data.x() * train_fit_.beta;
        train_residuals_.array() -= train_fit_.intercept;
        break;
      }
      case PredictorKind::Custom: {
        require(static_cast<bool>(spec.custom), "custom predictor has no fitter");
        aug_x_.resize(n + 1, data.p());
        aug_x_.topRows(n) = data.x();
        aug_x_.row(n) = x_new.transpose();
        const Vector at_new = spec.custom(data.x(), data.y(), x_new.transpose());
        require(at_new.size() == 1, "custom fitter must return one prediction per query row");
        center_ = at_new(0);
        train_residuals_ = data.y() - spec.custom(data.x(), data.y(), data.x());
        break;
      }
    }
  }

  Vector abs_residuals(double y_trial) const {
    const Index n = data_.n();
    switch (spec_.kind) {
      case PredictorKind::Mean:
      case PredictorKind::OlsFull:
      case PredictorKind::OlsSubset:
        return (offset_ + slope_ * y_trial).cwiseAbs();
      case PredictorKind::Lasso: {
        const LassoProblem aug = problem_->augmented(x_new_, y_trial);
        const LassoFit fit = solve_lasso(aug, spec_.lambda, LassoOptions{}, &train_fit_.beta);
        Vector e(n + 1);
        e.head(n) = data_.y() - data_.x() * fit.beta;
        e.head(n).array() -= fit.intercept;
        e(n) = y_trial - fit.intercept - x_new_.dot(fit.beta);
        return e.cwiseAbs();
      }
      case PredictorKind::Custom: {
        Vector aug_y(n + 1);
        aug_y.head(n) = data_.y();
        aug_y(n) = y_trial;
        const Vector fitted = spec_.custom(aug_x_, aug_y, aug_x_);
        require(fitted.size() == n + 1, "custom fitter returned the wrong number of predictions");
        return (aug_y - fitted).cwiseAbs();
      }
    }
    return {};
  }

  double pvalue(double y_trial) const {
    const Vector e = abs_residuals(y_trial);
    const Index last = e.size() - 1;
    // Ties are inclusive; the slack absorbs rounding in otherwise-equal residuals.
    const double slack = 1e-11 * (1.0 + e.maxCoeff());
    const double target = e(last) - slack;
    Index count = 0;
    for (Index i = 0; i < e.size(); ++i) count += e(i) >= target ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(e.size());
  }

  double center() const { return center_; }
  const Vector& train_residuals() const { return train_residuals_; }

 private:
  const Dataset& data_;
  Vector x_new_;
  PredictorSpec spec_;
  double center_ = 0.0;
  Vector train_residuals_;
  // linear smoothers
  Vector offset_;
  Vector slope_;
  // lasso
  std::optional<LassoProblem> problem_;
  LassoFit train_fit_;
  // custom
  Matrix aug_x_;
};

}  // namespace

double conformal_pvalue(const Dataset& data, const Vector& x_new, double y_trial,
                        const PredictorSpec& predictor) {
  return AugmentedResiduals(data, x_new, predictor).pvalue(y_trial);
}

ConformalResult conformal_interval(const Dataset& data, const Vector& x_new, double alpha,
                                   const PredictorSpec& predictor, const GridSpec& grid) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(grid.points >= 16, "conformal grid needs at least 16 points");
  require(grid.max_doublings >= 0, "max_doublings must be nonnegative");

  const AugmentedResiduals model(data, x_new, predictor);
  const double center = model.center();
  const Vector& r = model.train_residuals();

  double half = 0.0;
  if (grid.half_width) {
    require(*grid.half_width > 0.0, "grid half-width must be positive");
    half = *grid.half_width;
  } else {
    std::vector<double> rv(r.data(), r.data() + r.size());
    half = 3.0 * (r.cwiseAbs().maxCoeff() + stats::sample_sd(rv));
    // An exact training fit leaves only rounding-level residuals; keep the grid
    // well above that scale so tie slack does not swallow the trial residual.
    const std::vector<double> yv(data.y().data(), data.y().data() + data.n());
    half = std::max(half, 1e-6 * (1.0 + std::abs(center) + stats::sample_sd(yv)));
  }

  int doublings = 0;
  bool bounded = false;
  while (true) {
    if (model.pvalue(center - half) < alpha && model.pvalue(center + half) < alpha) {
      bounded = true;
      break;
    }
    if (doublings == grid.max_doublings) break;
    half *= 2.0;
    ++doublings;
  }

  const int count = grid.points % 2 == 1 ? grid.points : grid.points + 1;
  ConformalResult result;
  result.alpha = alpha;
  result.x_new = x_new;
  result.center = center;
  result.half_width = half;
  result.doublings = doublings;
  result.step = 2.0 * half / static_cast<double>(count - 1);
  result.grid.resize(static_cast<std::size_t>(count));
  result.p_values.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    result.grid[static_cast<std::size_t>(k)] =
        center + half * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  parallel_for(result.grid.size(),
               [&](std::size_t k) { result.p_values[k] = model.pvalue(result.grid[k]); });

  std::ptrdiff_t first = -1;
  std::ptrdiff_t last = -1;
  for (std::size_t k = 0; k < result.grid.size(); ++k) {
    if (result.p_values[k] >= alpha) {
      if (first < 0) first = static_cast<std::ptrdiff_t>(k);
      last = static_cast<std::ptrdiff_t>(k);
    }
  }
  if (first < 0) {
    result.empty_accepted = true;
    first = last = std::max_element(result.p_values.begin(), result.p_values.end()) -
                   result.p_values.begin();
  }
  result.lo = result.grid[static_cast<std::size_t>(first)] - result.step;
  result.hi = result.grid[static_cast<std::size_t>(last)] + result.step;
  result.length = result.hi - result.lo;

  if (!bounded) {
    throw UnboundedIntervalError(
        "prediction set still reaches the grid edge after " + std::to_string(doublings) +
            " doublings (half-width " + std::to_string(half) + ")",
        std::move(result));
  }
  return result;
}

LambdaChoice choose_lambda_by_length(const Dataset& data, const Vector& x_new, double alpha,
                                     const LassoPath& path, const GridSpec& grid) {
  if (path.lambdas.empty()) fail(ErrorCode::InvalidArgument, "lasso path is empty");
  LambdaChoice choice;
  std::optional<ConformalResult> best;
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    try {
      ConformalResult res =
          conformal_interval(data, x_new, alpha, PredictorSpec::lasso(path.lambdas[k]), grid);
      choice.lengths.push_back(res.length);
      if (!best || res.length < best->length) {
        choice.index = k;
        choice.lambda = path.lambdas[k];
        best = std::move(res);
      }
    } catch (const UnboundedIntervalError&) {
      choice.lengths.push_back(std::numeric_limits<double>::infinity());
    }
  }
  if (!best) {
    fail(ErrorCode::NoFiniteInterval, "every lambda on the path gave an unbounded interval");
  }
  choice.result = std::move(*best);
  return choice;
}

std::map<Index, double> variable_effect_lengths(const Dataset& data, const Vector& x_new,
                                                double alpha,
                                                const std::vector<Index>& base_subset,
                                                const GridSpec& grid) {
  if (base_subset.empty()) fail(ErrorCode::EmptySelection, "variable effects need a nonempty S");

  auto length_for = [&](const std::vector<Index>& subset) {
    const PredictorSpec spec =
        subset.empty() ? PredictorSpec::mean() : PredictorSpec::ols_subset(subset);
    return conformal_interval(data, x_new, alpha, spec, grid).length;
  };

  const double base = length_for(base_subset);
  std::map<Index, double> deltas;
  for (Index j : base_subset) {
    std::vector<Index> reduced;
    for (Index k : base_subset) {
      if (k != j) reduced.push_back(k);
    }
    try {
      deltas[j] = length_for(reduced) - base;
    } catch (const Error& e) {
      throw e.with_stage("drop " + data.names()[static_cast<std::size_t>(j)]);
    }
  }
  return deltas;
}

}  // namespace agnostic
