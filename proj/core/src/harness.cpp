#include <algorithm>
#include <cmath>

#include "agnostic/error.hpp"
#include "agnostic/harness.hpp"
#include "agnostic/linalg.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/stats.hpp"

namespace agnostic {

std::string_view to_string(IntervalMethod method) noexcept {
  switch (method) {
    case IntervalMethod::Normal: return "normal";
    case IntervalMethod::OrderStatistic: return "order_statistic";
    case IntervalMethod::LeastSquares: return "least_squares";
  }
  return "unknown";
}

std::string_view to_string(RiskScale scale) noexcept {
  return scale == RiskScale::Absolute ? "absolute" : "squared";
}

std::string IntervalReport::correction() const {
  return bonferroni ? "bonferroni(" + std::to_string(*bonferroni) + ")" : "none";
}

namespace {

void check_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)"); }

double loss(double residual, RiskScale scale) {
  return scale == RiskScale::Absolute ? std::abs(residual) : residual * residual;
}

void check_model(const Dataset& d2, const SelectedModel& model) {
  require(model.beta_hat.size() == d2.p(), "model width does not match the dataset");
}

}  // namespace

IntervalReport normal_interval(std::string label, std::span<const double> values, double alpha,
                               int family) {
  check_alpha(alpha);
  require(!values.empty(), "interval needs at least one value");
  require(family >= 1, "family size must be positive");
  const double alpha_eff = alpha / family;
  const double est = stats::mean(values);
  const double s = stats::sample_sd(values);
  const double half = stats::two_sided_z(alpha_eff) * s / std::sqrt(static_cast<double>(values.size()));

  IntervalReport r;
  r.label = std::move(label);
  r.estimate = est;
  r.lower = est - half;
  r.upper = est + half;
  r.level = 1.0 - alpha_eff;
  if (family > 1) r.bonferroni = family;
  r.method = IntervalMethod::Normal;
  return r;
}

std::vector<double> prediction_losses(const Dataset& data, const SelectedModel& model,
                                      RiskScale scale) {
  check_model(data, model);
  const Vector pred = model.predict(data.x());
  std::vector<double> out(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) {
    out[static_cast<std::size_t>(i)] = loss(data.y()(i) - pred(i), scale);
  }
  return out;
}

RiskReport risk_interval(const Dataset& d2, const SelectedModel& model, double alpha,
                         RiskScale scale) {
  check_alpha(alpha);
  RiskReport report;
  report.scale = scale;
  report.deltas = prediction_losses(d2, model, scale);
  report.risk = normal_interval("selected", report.deltas, alpha);

  std::vector<double> null_losses(static_cast<std::size_t>(d2.n()));
  for (Index i = 0; i < d2.n(); ++i) {
    null_losses[static_cast<std::size_t>(i)] = loss(d2.y()(i) - model.null_intercept, scale);
  }
  report.null_risk = normal_interval("null", null_losses, alpha);
  return report;
}

IntervalReport order_statistic_interval(std::string label, std::span<const double> values,
                                        double alpha) {
  check_alpha(alpha);
  const std::size_t m = values.size();
  require(m >= 1, "interval needs at least one value");
  const double target = 1.0 - alpha;
  auto coverage = [m](std::size_t l) {
    return 1.0 - 2.0 * stats::binomial_half_cdf(m, static_cast<std::ptrdiff_t>(l) - 1);
  };
  if (coverage(1) < target) {
    std::size_t needed = m + 1;
    while (1.0 - 2.0 * std::pow(0.5, static_cast<double>(needed)) < target) ++needed;
    fail(ErrorCode::InfeasibleLevel,
         "order-statistic interval at level " + std::to_string(target) + " needs m >= " +
             std::to_string(needed) + " (have " + std::to_string(m) + ")");
  }
  std::size_t l = 1;
  while (2 * (l + 1) <= m && coverage(l + 1) >= target) ++l;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  IntervalReport r;
  r.label = std::move(label);
  r.estimate = stats::median(values);
  r.lower = sorted[l - 1];
  r.upper = sorted[m - l];
  r.level = target;
  r.method = IntervalMethod::OrderStatistic;
  return r;
}

IntervalReport median_risk_interval(const Dataset& d2, const SelectedModel& model, double alpha,
                                    RiskScale scale) {
  const auto deltas = prediction_losses(d2, model, scale);
  return order_statistic_interval("selected-median", deltas, alpha);
}

InflationReport risk_inflation(const Dataset& d2, const SelectedModel& model, double alpha,
                               bool bonferroni, RiskScale scale) {
  check_alpha(alpha);
  check_model(d2, model);
  if (model.subset.empty()) fail(ErrorCode::EmptySelection, "risk inflation needs a nonempty S");

  const Vector pred = model.predict(d2.x());
  const auto family = static_cast<int>(model.subset.size());
  std::vector<IntervalReport> intervals(model.subset.size());
  std::vector<std::vector<double>> e_values(model.subset.size());

  parallel_for(model.subset.size(), [&](std::size_t k) {
    const Index j = model.subset[k];
    const double bj = model.beta_hat(j);
    std::vector<double> e(static_cast<std::size_t>(d2.n()));
    for (Index i = 0; i < d2.n(); ++i) {
      const double r = d2.y()(i) - pred(i);
      e[static_cast<std::size_t>(i)] = bj == 0.0 ? 0.0 : loss(r + bj * d2.x()(i, j), scale) - loss(r, scale);
    }
    intervals[k] = normal_interval(d2.names()[static_cast<std::size_t>(j)], e, alpha,
                                   bonferroni ? family : 1);
    e_values[k] = std::move(e);
  });

  InflationReport report;
  report.order = model.subset;
  for (std::size_t k = 0; k < model.subset.size(); ++k) {
    report.per_variable.emplace(model.subset[k], std::move(intervals[k]));
    report.e_values.emplace(model.subset[k], std::move(e_values[k]));
  }
  return report;
}

ProjectedReport projected_params(const Dataset& d2, const std::vector<Index>& subset, double alpha,
                                 bool bonferroni, CovarianceKind covariance) {
  check_alpha(alpha);
  const Index k = static_cast<Index>(subset.size()) + 1;
  const Index m = d2.n();
  if (k >= m) {
    fail(ErrorCode::TooFewRows, "projected parameters need |S| + 1 < m2 (|S| = " +
                                    std::to_string(subset.size()) + ", m2 = " + std::to_string(m) +
                                    ")");
  }
  const Matrix design = linalg::design_with_intercept(d2.x(), subset);
  const double cond = linalg::gram_condition_number(design);
  if (!(cond < 1e12)) {
    fail(ErrorCode::SingularDesign,
         "Gram matrix of [1, X_S] has condition number " + std::to_string(cond));
  }
  const auto fit = linalg::least_squares(design, d2.y());

  const Matrix gram = design.transpose() * design;
  const Matrix bread = gram.ldlt().solve(Matrix::Identity(k, k));
  Matrix cov;
  if (covariance == CovarianceKind::Robust) {
    const Matrix weighted = design.array().colwise() * fit.residuals.array().square();
    const Matrix meat = design.transpose() * weighted;
    cov = bread * meat * bread;
  } else {
    cov = bread * (fit.rss / static_cast<double>(m - k));
  }
  cov = 0.5 * (cov + cov.transpose());

  ProjectedReport report;
  report.subset = subset;
  report.beta_star_hat = fit.coef;
  report.covariance = cov;
  report.covariance_kind = covariance;
  report.condition_number = cond;

  const int family = bonferroni && !subset.empty() ? static_cast<int>(subset.size()) : 1;
  const double alpha_eff = alpha / family;
  const double z = stats::two_sided_z(alpha_eff);
  for (Index c = 0; c < k; ++c) {
    IntervalReport r;
    r.label = c == 0 ? "(Intercept)" : d2.names()[static_cast<std::size_t>(subset[static_cast<std::size_t>(c - 1)])];
    r.estimate = fit.coef(c);
    const double se = std::sqrt(std::max(0.0, cov(c, c)));
    r.lower = r.estimate - z * se;
    r.upper = r.estimate + z * se;
    r.level = 1.0 - alpha_eff;
    if (family > 1) r.bonferroni = family;
    r.method = IntervalMethod::LeastSquares;
    report.intervals.push_back(std::move(r));
  }
  return report;
}

namespace {

template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

}  // namespace

HarnessResult run_harness(const Dataset& data, const HarnessConfig& config) {
  check_alpha(config.alpha);
  SplitPair split = staged("split", [&] { return agnostic::split(data, config.seed); });

  std::optional<StandardizationRecord> record;
  Dataset d1 = split.d1;
  Dataset d2 = split.d2;
  if (config.standardize) {
    Standardized st = staged("standardize", [&] { return standardize(split.d1, split.d2); });
    d1 = std::move(st.train);
    d2 = std::move(st.applied);
    record = std::move(st.record);
  }

  SelectedModel model = staged("select", [&] { return select(d1, config.selector); });

  if (config.coefficients == CoefficientSource::RefitOnInferenceHalf) {
    staged("refit", [&] {
      const auto fit =
          linalg::least_squares(linalg::design_with_intercept(d2.x(), model.subset), d2.y());
      model.beta_hat.setZero();
      model.intercept = fit.coef(0);
      for (std::size_t k = 0; k < model.subset.size(); ++k) {
        model.beta_hat(model.subset[k]) = fit.coef(static_cast<Index>(k) + 1);
      }
      return 0;
    });
  }

  RiskReport risk =
      staged("risk", [&] { return risk_interval(d2, model, config.alpha, config.scale); });

  std::optional<IntervalReport> median;
  try {
    median = median_risk_interval(d2, model, config.alpha, config.scale);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleLevel) throw e.with_stage("median-risk");
  }

  std::optional<InflationReport> inflation;
  if (!model.subset.empty()) {
    inflation = staged("inflation", [&] {
      return risk_inflation(d2, model, config.alpha, config.bonferroni, config.scale);
    });
  }

  ProjectedReport projected = staged("projected", [&] {
    return projected_params(d2, model.subset, config.alpha, config.bonferroni, config.covariance);
  });

  return HarnessResult{std::move(split),   std::move(record),    std::move(model),
                       std::move(risk),    std::move(median),    std::move(inflation),
                       std::move(projected)};
}

}  // namespace agnostic
