#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "agnostic/data.hpp"
#include "agnostic/rng.hpp"

namespace agnostic {

struct BoundInputs {
  double c_max = 1.0;      // uniform bound on |X_j| and |Y|
  double l1_budget = 1.0;  // radius L of the ℓ1 ball
  Index n = 1;
  Index p = 1;
  double delta = 0.1;      // failure probability

  void validate() const;  // throws InvalidArgument
};

/// sqrt( 8 C² L⁴ / n · log(2p²/δ) ): the excess squared-error risk of the
/// ℓ1-constrained least-squares estimator over the best predictor in B(L),
/// holding with probability at least 1 − δ.
double excess_risk_bound(const BoundInputs& inputs);

/// Bounded data-generating process: fills x (length p) and returns y.
struct Dgp {
  std::string name;
  Index p = 1;
  double c_max = 1.0;
  std::function<double(Rng&, Eigen::Ref<Vector>)> draw;
};

/// "bounded-linear", "bounded-sign" or "bounded-sine"; X ~ U[−C, C]^p and the
/// response is clipped to [−C, C].
Dgp make_dgp(std::string_view name, Index p, double c_max = 1.0);

/// Draws `count` rows; throws OutOfBounds if any value exceeds c_max.
void draw_sample(const Dgp& dgp, Rng& rng, Index count, Matrix& x, Vector& y);

/// Sufficient statistics of a sample for squared-error risk of no-intercept
/// linear predictors: R̂(β) = yᵀy/N − 2 βᵀXᵀy/N + βᵀ(XᵀX/N)β.
struct RiskMoments {
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  Index size = 0;

  static RiskMoments from_sample(const Matrix& x, const Vector& y);
  double risk(const Vector& beta) const;
};

/// Euclidean projection onto {‖β‖₁ ≤ radius} (sort-based).
Vector project_l1_ball(const Vector& v, double radius);

struct RiskMinimizer {
  Vector beta;
  double risk = 0.0;
  int iterations = 0;
};

/// Accelerated projected gradient on R̂ over B(radius), stopping when the
/// largest coefficient change falls below `tolerance`.
RiskMinimizer minimize_risk_l1(const RiskMoments& moments, double radius,
                               double tolerance = 1e-10, int max_iterations = 200000);

struct BoundCheckReport {
  double bound_value = 0.0;
  double violation_rate = 0.0;
  Index violations = 0;
  Index reps = 0;
  Index holdout_size = 0;
  double risk_star = 0.0;    // holdout risk of the best predictor in B(L)
  double mean_excess = 0.0;  // average R̂(β̂) − R̂(β★)
  double max_excess = 0.0;
};

struct VerifyOptions {
  Index holdout_size = 50000;
};

/// Monte Carlo check of the oracle inequality: per replicate, fit the
/// constrained lasso on n fresh draws and compare its holdout risk against
/// R̂(β★) + bound. Replicates use seeds derived from (seed, rep).
BoundCheckReport verify_bound(const Dgp& dgp, const BoundInputs& inputs, Index reps,
                              std::uint64_t seed, const VerifyOptions& options = {});

}  // namespace agnostic
