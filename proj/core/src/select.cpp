#include <algorithm>

#include "agnostic/conformal.hpp"
#include "agnostic/error.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

namespace {

SelectedModel run_stepwise(const Dataset& data, const SelectorConfig& config) {
  return forward_stepwise(data, config.stepwise).first;
}

SelectedModel from_path(const LassoPath& path, std::size_t k, double null_intercept) {
  return model_from_coefficients(path.betas[k], path.intercepts[k], null_intercept, "lasso");
}

SelectedModel run_lasso(const Dataset& data, const SelectorConfig& config) {
  const double null_intercept = data.y().mean();
  switch (config.lambda_rule) {
    case LambdaRule::Fixed: {
      require(config.lambda >= 0.0, "fixed lambda must be nonnegative");
      LassoFit fit = lasso_penalized(data, config.lambda);
      SelectedModel model =
          model_from_coefficients(std::move(fit.beta), fit.intercept, null_intercept, "lasso");
      model.diagnostics.lambda = config.lambda;
      model.diagnostics.lambda_rule = "fixed";
      return model;
    }
    case LambdaRule::CrossValidation: {
      LassoPath path = lasso_path(data, config.k_lambdas, config.lambda_min_ratio);
      const std::vector<double> errors = cv_lasso_errors(data, path.lambdas);
      // First minimum along a decreasing grid: ties go to the larger λ.
      const auto k = static_cast<std::size_t>(
          std::min_element(errors.begin(), errors.end()) - errors.begin());
      SelectedModel model = from_path(path, k, null_intercept);
      model.diagnostics.lambda = path.lambdas[k];
      model.diagnostics.lambda_rule = "cv";
      model.diagnostics.path = std::move(path);
      return model;
    }
    case LambdaRule::ConformalLength: {
      LassoPath path = lasso_path(data, config.k_lambdas, config.lambda_min_ratio);
      const Vector x_new = config.x_new.value_or(Vector(data.x().colwise().mean().transpose()));
      GridSpec grid;
      grid.points = config.grid_points;
      const LambdaChoice choice =
          choose_lambda_by_length(data, x_new, config.conformal_alpha, path, grid);
      SelectedModel model = from_path(path, choice.index, null_intercept);
      model.diagnostics.lambda = choice.lambda;
      model.diagnostics.lambda_rule = "conformal-length";
      model.diagnostics.conformal_length = choice.result.length;
      model.diagnostics.path = std::move(path);
      return model;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown lambda rule");
}

}  // namespace

SelectorRegistry SelectorRegistry::with_builtins() {
  SelectorRegistry registry;
  registry.add("stepwise", run_stepwise);
  registry.add("lasso", run_lasso);
  return registry;
}

void SelectorRegistry::add(std::string id, SelectorFn fn) {
  require(static_cast<bool>(fn), "selector function is empty");
  selectors_[std::move(id)] = std::move(fn);
}

std::vector<std::string> SelectorRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, fn] : selectors_) out.push_back(id);
  return out;
}

SelectedModel SelectorRegistry::select(const Dataset& data, const SelectorConfig& config) const {
  const auto it = selectors_.find(config.id);
  if (it == selectors_.end()) {
    fail(ErrorCode::UnknownSelector, "no selector registered as '" + config.id + "'");
  }
  SelectedModel model = it->second(data, config);
  model.selector_id = config.id;
  return model;
}

SelectedModel select(const Dataset& data, const SelectorConfig& config) {
  static const SelectorRegistry builtins = SelectorRegistry::with_builtins();
  return builtins.select(data, config);
}

}  // namespace agnostic
