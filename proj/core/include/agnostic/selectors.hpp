#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agnostic/data.hpp"

namespace agnostic {

// ---------------------------------------------------------------------------
// Traces

struct CpTrace {
  std::vector<Index> order;   // variables in entering order
  std::vector<double> rss;    // rss[k] for the model with the first k variables (k = 0..K)
  std::vector<double> cp;     // Mallows Cp for the same prefixes
  double sigma2_hat = 0.0;
  std::string sigma2_source;  // "ols", "cv-lasso" or "user"
  Index chosen_k = 0;
};

struct LassoPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<Vector> betas;
  std::vector<double> intercepts;
  std::vector<double> l1_norms;
  std::vector<int> sweeps;
};

struct SelectorDiagnostics {
  std::optional<CpTrace> cp;
  std::optional<LassoPath> path;
  std::optional<double> lambda;
  std::string lambda_rule;
  std::optional<double> conformal_length;
};

struct SelectedModel {
  std::vector<Index> subset;  // sorted by entering order for stepwise, by index otherwise
  Vector beta_hat;            // zero outside `subset`
  double intercept = 0.0;
  double null_intercept = 0.0;  // mean response of the data the selector saw
  std::string selector_id;
  SelectorDiagnostics diagnostics;

  Vector predict(const Matrix& x) const;
};

/// Builds a SelectedModel from a full coefficient vector; the subset is the
/// support of `beta` in index order.
SelectedModel model_from_coefficients(Vector beta, double intercept, double null_intercept,
                                      std::string selector_id);

// ---------------------------------------------------------------------------
// Penalized / constrained lasso

/// Quadratic form of (1/(2m))‖y − Xβ‖² in Gram coordinates. With an
/// intercept the columns and response are centered first (unpenalized intercept).
class LassoProblem {
 public:
  LassoProblem(const Matrix& x, const Vector& y, bool intercept);

  /// Same problem with one extra observation appended (used by full conformal
  /// refits; costs O(p²) instead of a full pass over the data).
  LassoProblem augmented(const Eigen::Ref<const Vector>& x_new, double y_new) const;

  Index p() const noexcept { return gram_.cols(); }
  Index m() const noexcept { return m_; }
  bool intercept() const noexcept { return intercept_; }
  const Matrix& gram() const noexcept { return gram_; }
  const Vector& xty() const noexcept { return xty_; }

  /// max_j |⟨x_j, y⟩|/m on the (centered) data: the smallest λ giving β = 0.
  double lambda_max() const;

  /// (1/m)‖y − Xβ − b₀‖² at the optimal intercept for β.
  double empirical_risk(const Vector& beta) const;

  /// (1/(2m))‖y − Xβ − b₀‖² + λ‖β‖₁.
  double objective(const Vector& beta, double lambda) const;

  double intercept_for(const Vector& beta) const;

 private:
  LassoProblem() = default;
  void finalize();

  // Raw moments about a fixed shift (the original data means) so that
  // augmentation never recomputes sums over rows.
  Index m_ = 0;
  bool intercept_ = true;
  Vector shift_;
  double y_shift_ = 0.0;
  Vector sum_x_;
  double sum_y_ = 0.0;
  Matrix sum_xx_;
  Vector sum_xy_;
  double sum_yy_ = 0.0;

  // Derived (centered when intercept_).
  Vector x_mean_;
  double y_mean_ = 0.0;
  Matrix gram_;
  Vector xty_;
  double yty_ = 0.0;
};

struct LassoOptions {
  double tolerance = 1e-8;  // max coefficient change over a sweep
  int max_sweeps = 10000;
  bool intercept = true;
};

struct LassoFit {
  Vector beta;
  double intercept = 0.0;
  int sweeps = 0;
};

/// Coordinate descent at one λ, optionally warm-started. Throws NonConvergence.
LassoFit solve_lasso(const LassoProblem& problem, double lambda, const LassoOptions& options,
                     const Vector* warm_start = nullptr);

LassoFit lasso_penalized(const Dataset& data, double lambda, const LassoOptions& options = {});

/// Log-spaced λ grid from λ_max down to λ_max·lambda_min_ratio with warm starts.
LassoPath lasso_path(const Dataset& data, int k_lambdas = 100, double lambda_min_ratio = 1e-3,
                     const LassoOptions& options = {});

struct ConstrainedOptions {
  double norm_tolerance = 1e-9;
  int max_bisections = 200;
  LassoOptions solver{1e-12, 100000, false};
};

/// Empirical-risk minimizer over {‖β‖₁ ≤ L} without intercept, by bisection on
/// the penalty of the penalized solver. Throws BisectionFailure.
SelectedModel lasso_constrained(const Dataset& data, double l1_budget,
                                const ConstrainedOptions& options = {});

// ---------------------------------------------------------------------------
// Forward stepwise with Mallows Cp

struct StepwiseOptions {
  std::optional<Index> max_steps;  // default min(p, m − 2)
  std::optional<double> sigma2;    // overrides the estimated σ̂²
};

/// Greedy forward selection (largest RSS drop, lowest index on ties) with an
/// intercept; keeps the prefix minimizing Cp = RSS_k/σ̂² + 2k − m.
std::pair<SelectedModel, CpTrace> forward_stepwise(const Dataset& data,
                                                   const StepwiseOptions& options = {});

/// Mean out-of-fold squared error at each λ of `lambdas` for a lasso with
/// intercept; folds assign row i to fold i mod `folds`.
std::vector<double> cv_lasso_errors(const Dataset& data, const std::vector<double>& lambdas,
                                    int folds = 10);

/// Mean out-of-fold squared error of a 10-fold cross-validated lasso at its
/// best λ (folds by row index modulo 10). Used as the σ̂² fallback when p ≥ m − 1.
double cv_lasso_sigma2(const Dataset& data, int k_lambdas = 100, double lambda_min_ratio = 1e-3);

/// σ̂² by the documented fallback chain; sets `source`.
double estimate_sigma2(const Dataset& data, std::optional<double> user_sigma2, std::string& source);

// ---------------------------------------------------------------------------
// Selector dispatch

enum class LambdaRule { CrossValidation, Fixed, ConformalLength };

struct SelectorConfig {
  std::string id = "stepwise";
  StepwiseOptions stepwise;

  LambdaRule lambda_rule = LambdaRule::CrossValidation;
  double lambda = 0.0;  // for LambdaRule::Fixed
  int k_lambdas = 100;
  double lambda_min_ratio = 1e-3;

  // ConformalLength rule: query point (defaults to the column means) and level.
  std::optional<Vector> x_new;
  double conformal_alpha = 0.1;
  int grid_points = 1000;
};

using SelectorFn = std::function<SelectedModel(const Dataset&, const SelectorConfig&)>;

/// Name → selector map. Ships with "stepwise" and "lasso"; callers may add more.
class SelectorRegistry {
 public:
  static SelectorRegistry with_builtins();

  void add(std::string id, SelectorFn fn);
  bool contains(const std::string& id) const { return selectors_.contains(id); }
  std::vector<std::string> ids() const;

  SelectedModel select(const Dataset& data, const SelectorConfig& config) const;

 private:
  std::map<std::string, SelectorFn> selectors_;
};

/// Dispatch through the built-in registry. Throws UnknownSelector.
SelectedModel select(const Dataset& data, const SelectorConfig& config);

}  // namespace agnostic
