#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agnostic/data.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

enum class IntervalMethod { Normal, OrderStatistic, LeastSquares };
enum class RiskScale { Absolute, Squared };
enum class CovarianceKind { Robust, Classical };

std::string_view to_string(IntervalMethod method) noexcept;
std::string_view to_string(RiskScale scale) noexcept;

/// Uniform output record for every interval the harness produces.
struct IntervalReport {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;          // confidence level actually used for this interval
  std::optional<int> bonferroni;  // family size when a Bonferroni correction was applied
  IntervalMethod method = IntervalMethod::Normal;

  std::string correction() const;  // "none" or "bonferroni(k)"
  bool contains(const IntervalReport& other) const {
    return lower <= other.lower && other.upper <= upper;
  }
};

/// estimate ± z_{α'/2}·s/√m with α' = α/family, s the sample sd (m−1 divisor).
IntervalReport normal_interval(std::string label, std::span<const double> values, double alpha,
                               int family = 1);

struct RiskReport {
  IntervalReport risk;
  std::vector<double> deltas;
  RiskScale scale = RiskScale::Absolute;
  IntervalReport null_risk;  // intercept-only predictor fit on the selection half
};

struct InflationReport {
  std::vector<Index> order;  // S, in the model's order
  std::map<Index, IntervalReport> per_variable;
  std::map<Index, std::vector<double>> e_values;
};

struct ProjectedReport {
  std::vector<Index> subset;
  Vector beta_star_hat;  // intercept first, then S in order
  std::vector<IntervalReport> intervals;
  Matrix covariance;
  CovarianceKind covariance_kind = CovarianceKind::Robust;
  double condition_number = 1.0;
};

/// Per-row losses of `model` on `data` on the requested scale.
std::vector<double> prediction_losses(const Dataset& data, const SelectedModel& model,
                                      RiskScale scale);

RiskReport risk_interval(const Dataset& d2, const SelectedModel& model, double alpha,
                         RiskScale scale = RiskScale::Absolute);

/// Distribution-free interval for the median loss from order statistics:
/// [δ_(l), δ_(m+1−l)] with the largest l whose binomial coverage is ≥ 1−α.
IntervalReport median_risk_interval(const Dataset& d2, const SelectedModel& model, double alpha,
                                    RiskScale scale = RiskScale::Absolute);

/// Same construction on a raw sample; throws InfeasibleLevel when even the
/// full range misses the level.
IntervalReport order_statistic_interval(std::string label, std::span<const double> values,
                                        double alpha);

InflationReport risk_inflation(const Dataset& d2, const SelectedModel& model, double alpha,
                               bool bonferroni, RiskScale scale = RiskScale::Absolute);

ProjectedReport projected_params(const Dataset& d2, const std::vector<Index>& subset, double alpha,
                                 bool bonferroni,
                                 CovarianceKind covariance = CovarianceKind::Robust);

enum class CoefficientSource { SelectionHalf, RefitOnInferenceHalf };

struct HarnessConfig {
  SelectorConfig selector;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool bonferroni = true;
  RiskScale scale = RiskScale::Absolute;
  CovarianceKind covariance = CovarianceKind::Robust;
  bool standardize = true;
  CoefficientSource coefficients = CoefficientSource::SelectionHalf;
};

struct HarnessResult {
  SplitPair split;
  std::optional<StandardizationRecord> standardization;
  SelectedModel model;
  RiskReport risk;
  std::optional<IntervalReport> median_risk;  // absent when m2 is too small for the level
  std::optional<InflationReport> inflation;   // absent when S is empty
  ProjectedReport projected;
};

/// split → select on D1 → inference on D2, conditional on D1. Errors carry
/// the stage that raised them.
HarnessResult run_harness(const Dataset& data, const HarnessConfig& config);

inline HarnessResult run_harness(const Dataset& data, const SelectorConfig& selector,
                                 double alpha, std::uint64_t seed) {
  HarnessConfig config;
  config.selector = selector;
  config.alpha = alpha;
  config.seed = seed;
  return run_harness(data, config);
}

}  // namespace agnostic
