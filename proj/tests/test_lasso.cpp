#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agnostic/data.hpp"
#include "agnostic/error.hpp"
#include "agnostic/selectors.hpp"
#include "oracles.hpp"

using namespace agnostic;

namespace {

Dataset random_instance(std::uint64_t seed, Index m, Index p, double noise = 1.0) {
  std::mt19937_64 gen(seed);
  const Matrix x = oracle::normal_matrix(gen, m, p);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = j < 3 ? coef(gen) : 0.0;
  const Vector y = (x * beta + noise * oracle::normal_vector(gen, m)).array() + 0.7;
  return Dataset(x, y, oracle::names(p));
}

Dataset standardized(const Dataset& d) { return standardize(d, d).train; }

}  // namespace

TEST(LassoPenalized, ZeroAtLambdaMax) {
  const Dataset d = random_instance(1, 60, 6);
  const LassoProblem problem(d.x(), d.y(), true);
  const LassoFit fit = lasso_penalized(d, problem.lambda_max());
  EXPECT_TRUE(fit.beta.isZero());
  EXPECT_NEAR(fit.intercept, d.y().mean(), 1e-12);
  const LassoFit below = lasso_penalized(d, 0.99 * problem.lambda_max());
  EXPECT_GT(below.beta.lpNorm<1>(), 0.0);
}

TEST(LassoPenalized, SoftThresholdSinglePredictor) {
  std::mt19937_64 gen(2);
  const Index m = 40;
  Vector x = oracle::normal_vector(gen, m);
  x.array() -= x.mean();
  x *= std::sqrt(static_cast<double>(m)) / x.norm();  // mean 0, ‖x‖²/m = 1
  const Vector y = 0.8 * x + oracle::normal_vector(gen, m);
  const Dataset d(x, y, {"x"});
  const double z = x.dot(y) / static_cast<double>(m);
  for (double lambda : {0.0, 0.1, 0.3, 0.5, std::abs(z) * 0.999, std::abs(z) * 1.5}) {
    const LassoFit fit = lasso_penalized(d, lambda);
    EXPECT_NEAR(fit.beta(0), oracle::soft_threshold(z, lambda), 1e-10) << lambda;
  }
}

TEST(LassoPenalized, MatchesExhaustiveGridForTwoPredictors) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Dataset d = random_instance(100 + seed, 30, 2);
    const auto s = oracle::moments2(d.x(), d.y(), true);
    const LassoProblem problem(d.x(), d.y(), true);
    for (double frac : {0.02, 0.2, 0.6}) {
      const double lambda = frac * problem.lambda_max();
      const LassoFit fit = lasso_penalized(d, lambda);
      const oracle::GridMin grid = oracle::grid_minimize2(s, lambda);
      const double cd = oracle::objective2(s, fit.beta(0), fit.beta(1), lambda);
      EXPECT_NEAR(cd, grid.value, 1e-4) << "seed " << seed << " frac " << frac;
      EXPECT_LE(cd, grid.value + 1e-12);
      EXPECT_NEAR(problem.objective(fit.beta, lambda), cd, 1e-10);
    }
  }
}

TEST(LassoPenalized, KktConditions) {
  const Dataset d = standardized(random_instance(3, 80, 10));
  const LassoProblem problem(d.x(), d.y(), true);
  const Matrix xc = d.x().rowwise() - d.x().colwise().mean();
  const double m = static_cast<double>(d.n());
  for (double frac : {0.05, 0.2, 0.5}) {
    const double lambda = frac * problem.lambda_max();
    const LassoFit fit = lasso_penalized(d, lambda);
    const Vector r = (d.y() - d.x() * fit.beta).array() - fit.intercept;
    EXPECT_NEAR(r.mean(), 0.0, 1e-10);
    const Vector g = xc.transpose() * r / m;
    for (Index j = 0; j < d.p(); ++j) {
      if (fit.beta(j) == 0.0) {
        EXPECT_LE(std::abs(g(j)), lambda + 1e-6) << j;
      } else {
        EXPECT_NEAR(g(j), lambda * (fit.beta(j) > 0 ? 1.0 : -1.0), 1e-6) << j;
      }
    }
  }
}

TEST(LassoPenalized, RejectsNegativeLambda) {
  const Dataset d = random_instance(4, 20, 2);
  EXPECT_THROW(lasso_penalized(d, -1.0), Error);
}

TEST(LassoPenalized, NonConvergenceIsReported) {
  const Dataset d = random_instance(5, 50, 8);
  LassoOptions options;
  options.max_sweeps = 1;
  options.tolerance = 1e-15;
  try {
    lasso_penalized(d, 1e-4, options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
  }
}

TEST(LassoPath, GridAndMonotoneNorms) {
  const Dataset d = standardized(random_instance(6, 100, 8));
  const LassoPath path = lasso_path(d, 100, 1e-3);
  ASSERT_EQ(path.lambdas.size(), 100u);
  const LassoProblem problem(d.x(), d.y(), true);
  EXPECT_NEAR(path.lambdas.front(), problem.lambda_max(), 1e-12);
  EXPECT_NEAR(path.lambdas.back(), 1e-3 * problem.lambda_max(), 1e-12);
  EXPECT_TRUE(path.betas.front().isZero());
  for (std::size_t k = 1; k < path.lambdas.size(); ++k) {
    EXPECT_LT(path.lambdas[k], path.lambdas[k - 1]);
    EXPECT_GE(path.l1_norms[k], path.l1_norms[k - 1] - 1e-6);
  }
}

TEST(LassoPath, Continuity) {
  const Dataset d = standardized(random_instance(7, 100, 12));
  const LassoPath path = lasso_path(d, 100, 1e-3);
  const double p = static_cast<double>(d.p());
  for (std::size_t k = 0; k + 1 < path.lambdas.size(); ++k) {
    const double jump = (path.betas[k] - path.betas[k + 1]).cwiseAbs().maxCoeff();
    EXPECT_LE(jump, 10.0 * (path.lambdas[k] - path.lambdas[k + 1]) * p) << k;
  }
}

TEST(LassoPath, AgreesWithColdStarts) {
  const Dataset d = random_instance(8, 60, 5);
  const LassoPath path = lasso_path(d, 20, 1e-2);
  const LassoProblem problem(d.x(), d.y(), true);
  for (std::size_t k = 0; k < path.lambdas.size(); k += 4) {
    const LassoFit cold = lasso_penalized(d, path.lambdas[k]);
    EXPECT_NEAR(problem.objective(path.betas[k], path.lambdas[k]),
                problem.objective(cold.beta, path.lambdas[k]), 1e-9);
  }
}

TEST(LassoProblem, AugmentedMatchesRebuild) {
  const Dataset d = random_instance(9, 25, 4);
  const LassoProblem base(d.x(), d.y(), true);
  Vector x_new(4);
  x_new << 0.3, -1.2, 2.0, 0.1;
  const LassoProblem aug = base.augmented(x_new, 3.5);
  Matrix xa(26, 4);
  xa << d.x(), x_new.transpose();
  Vector ya(26);
  ya << d.y(), 3.5;
  const LassoProblem rebuilt(xa, ya, true);
  EXPECT_TRUE(aug.gram().isApprox(rebuilt.gram(), 1e-12));
  EXPECT_TRUE(aug.xty().isApprox(rebuilt.xty(), 1e-12));
  EXPECT_EQ(aug.m(), 26);
}

TEST(LassoConstrained, HugeBudgetGivesOls) {
  const Dataset d = random_instance(10, 80, 4);
  const Vector ols = d.x().colPivHouseholderQr().solve(d.y());  // no intercept
  const SelectedModel fit = lasso_constrained(d, 10.0 * ols.lpNorm<1>() + 1.0);
  EXPECT_LE((fit.beta_hat - ols).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_DOUBLE_EQ(fit.intercept, 0.0);
}

TEST(LassoConstrained, BindingBudgetOnSphere) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = random_instance(200 + seed, 40, 2);
    const auto s = oracle::moments2(d.x(), d.y(), false);
    const Vector ols = d.x().colPivHouseholderQr().solve(d.y());
    if (ols.lpNorm<1>() <= 0.6) continue;  // budget would not bind
    const SelectedModel fit = lasso_constrained(d, 0.5);
    EXPECT_NEAR(fit.beta_hat.lpNorm<1>(), 0.5, 1e-6) << seed;
    const double value = oracle::objective2(s, fit.beta_hat(0), fit.beta_hat(1), 0.0);
    EXPECT_LE(value, oracle::sphere_minimize2(s, 0.5) + 1e-4) << seed;
  }
}

TEST(LassoConstrained, RejectsNonPositiveBudget) {
  const Dataset d = random_instance(11, 20, 2);
  EXPECT_THROW(lasso_constrained(d, 0.0), Error);
  EXPECT_THROW(lasso_constrained(d, -1.0), Error);
}

TEST(LassoConstrained, DualityWithPenalized) {
  const Dataset d = random_instance(12, 60, 6);
  const LassoProblem problem(d.x(), d.y(), false);
  LassoOptions options;
  options.intercept = false;
  options.tolerance = 1e-12;
  options.max_sweeps = 100000;
  for (double frac : {0.05, 0.1, 0.3, 0.7}) {
    const double lambda = frac * problem.lambda_max();
    const LassoFit pen = lasso_penalized(d, lambda, options);
    const double t = pen.beta.lpNorm<1>();
    const SelectedModel con = lasso_constrained(d, t);
    EXPECT_NEAR(problem.objective(con.beta_hat, lambda), problem.objective(pen.beta, lambda), 1e-5)
        << frac;
  }
}

TEST(LassoConstrained, HighDimensionalBudget) {
  const Dataset d = random_instance(13, 30, 60);
  const SelectedModel fit = lasso_constrained(d, 1.0);
  EXPECT_LE(fit.beta_hat.lpNorm<1>(), 1.0 + 1e-6);
  const LassoProblem problem(d.x(), d.y(), false);
  // No point of the ball should do better along a few random feasible directions.
  std::mt19937_64 gen(1);
  for (int k = 0; k < 200; ++k) {
    Vector v = oracle::normal_vector(gen, 60);
    v *= 1.0 / v.lpNorm<1>();
    EXPECT_LE(problem.empirical_risk(fit.beta_hat), problem.empirical_risk(v) + 1e-9);
  }
}
