#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agnostic/conformal.hpp"
#include "agnostic/error.hpp"
#include "agnostic/rng.hpp"
#include "oracles.hpp"

using namespace agnostic;

namespace {

Dataset linear_data(Rng& rng, Index n, Index p, double noise) {
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    y(i) = 2.0 * x(i, 0) + noise * rng.normal();
  }
  return Dataset(x, y, oracle::names(p));
}

Dataset response_only(const std::vector<double>& y) {
  const Index n = static_cast<Index>(y.size());
  return Dataset(Matrix::Zero(n, 1), Eigen::Map<const Vector>(y.data(), n), {"x1"});
}

}  // namespace

TEST(ConformalPvalue, SinglePoint) {
  const Dataset d = response_only({0.5});
  const Vector x_new = Vector::Zero(1);
  // Symmetric predictor: both residuals have equal size.
  EXPECT_DOUBLE_EQ(conformal_pvalue(d, x_new, 3.0, PredictorSpec::mean()), 1.0);
  // Predictor fixed at zero: residuals are the responses themselves.
  const auto zero = PredictorSpec::custom_fitter(
      "zero", [](const Matrix&, const Vector&, const Matrix& q) { return Vector::Zero(q.rows()).eval(); });
  EXPECT_DOUBLE_EQ(conformal_pvalue(d, x_new, 3.0, zero), 0.5);
  EXPECT_DOUBLE_EQ(conformal_pvalue(d, x_new, 0.1, zero), 1.0);
}

TEST(ConformalPvalue, AllResidualsEqual) {
  const Dataset d = response_only({2, 2, 2, 2});
  EXPECT_DOUBLE_EQ(conformal_pvalue(d, Vector::Zero(1), 2.0, PredictorSpec::mean()), 1.0);
}

TEST(ConformalPvalue, EnumerationFixture) {
  const std::vector<double> y{1, 2, 4, 7};
  const Dataset d = response_only(y);
  for (double trial : {-10.0, -2.0, 0.0, 1.0, 3.5, 4.0, 6.25, 9.0, 12.0, 30.0}) {
    EXPECT_EQ(conformal_pvalue(d, Vector::Zero(1), trial, PredictorSpec::mean()),
              oracle::mean_pvalue(y, trial))
        << trial;
  }
}

TEST(ConformalPvalue, OlsMatchesExplicitRefit) {
  Rng rng(1);
  const Dataset d = linear_data(rng, 15, 3, 1.0);
  Vector x_new(3);
  x_new << 0.2, -0.4, 1.1;
  for (double trial = -6.0; trial <= 6.0; trial += 0.37) {
    EXPECT_DOUBLE_EQ(conformal_pvalue(d, x_new, trial, PredictorSpec::ols_full()),
                     oracle::ols_pvalue(d.x(), d.y(), x_new, trial))
        << trial;
  }
}

TEST(ConformalPvalue, SmootherMatchesCustomRefit) {
  Rng rng(2);
  const Dataset d = linear_data(rng, 20, 3, 1.0);
  Vector x_new(3);
  x_new << -1.0, 0.5, 0.0;
  const auto refit = PredictorSpec::custom_fitter(
      "ols-refit", [](const Matrix& x, const Vector& y, const Matrix& q) {
        const Vector b = oracle::ols_with_intercept(x, y);
        return Vector((q * b.tail(x.cols())).array() + b(0));
      });
  const auto subset = PredictorSpec::ols_subset({0});
  const auto refit_subset = PredictorSpec::custom_fitter(
      "ols-x1", [](const Matrix& x, const Vector& y, const Matrix& q) {
        const Vector b = oracle::ols_with_intercept(x.leftCols(1), y);
        return Vector((q.leftCols(1) * b.tail(1)).array() + b(0));
      });
  for (double trial = -5.0; trial <= 5.0; trial += 0.5) {
    EXPECT_EQ(conformal_pvalue(d, x_new, trial, PredictorSpec::ols_full()),
              conformal_pvalue(d, x_new, trial, refit));
    EXPECT_EQ(conformal_pvalue(d, x_new, trial, subset),
              conformal_pvalue(d, x_new, trial, refit_subset));
  }
}

TEST(ConformalPvalue, LassoMatchesCustomRefit) {
  Rng rng(3);
  const Dataset d = linear_data(rng, 25, 4, 1.0);
  const Vector x_new = Vector::Constant(4, 0.3);
  const double lambda = 0.2;
  const auto refit = PredictorSpec::custom_fitter(
      "lasso-refit", [lambda](const Matrix& x, const Vector& y, const Matrix& q) {
        LassoOptions options;
        options.tolerance = 1e-12;
        options.max_sweeps = 100000;
        const LassoFit fit = lasso_penalized(Dataset(x, y, oracle::names(x.cols())), lambda, options);
        return Vector((q * fit.beta).array() + fit.intercept);
      });
  for (double trial = -6.0; trial <= 6.0; trial += 0.75) {
    EXPECT_EQ(conformal_pvalue(d, x_new, trial, PredictorSpec::lasso(lambda)),
              conformal_pvalue(d, x_new, trial, refit))
        << trial;
  }
}

TEST(ConformalInterval, GridMatchesEnumerationExactly) {
  const std::vector<double> y{1, 2, 4, 7};
  const ConformalResult r = conformal_interval(response_only(y), Vector::Zero(1), 0.4,
                                               PredictorSpec::mean());
  ASSERT_EQ(r.grid.size(), r.p_values.size());
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    ASSERT_EQ(r.p_values[i], oracle::mean_pvalue(y, r.grid[i])) << r.grid[i];
    const double k = r.p_values[i] * 5.0;
    EXPECT_EQ(k, std::round(k));
  }
}

TEST(ConformalInterval, HullContainsAcceptedPoints) {
  Rng rng(4);
  const Dataset d = linear_data(rng, 30, 2, 1.0);
  const ConformalResult r = conformal_interval(d, Vector::Zero(2), 0.1, PredictorSpec::ols_full());
  const double n1 = 31.0;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const double k = r.p_values[i] * n1;
    EXPECT_NEAR(k, std::round(k), 1e-9);
    EXPECT_GE(k, 1.0 - 1e-9);
    if (r.p_values[i] >= 0.1) {
      EXPECT_GE(r.grid[i], r.lo);
      EXPECT_LE(r.grid[i], r.hi);
    }
  }
  EXPECT_DOUBLE_EQ(r.length, r.hi - r.lo);
  EXPECT_EQ(r.grid.size() % 2, 1u);
  EXPECT_LT(r.lo, r.center);
  EXPECT_GT(r.hi, r.center);
}

TEST(ConformalInterval, UnboundedWhenAlphaBelowMinimumPvalue) {
  Rng rng(5);
  const Dataset d = linear_data(rng, 20, 2, 1.0);
  try {
    conformal_interval(d, Vector::Zero(2), 0.001, PredictorSpec::ols_full());
    FAIL();
  } catch (const UnboundedIntervalError& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnboundedInterval);
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    EXPECT_EQ(e.widest().doublings, 10);
  }
}

TEST(ConformalInterval, MeanPredictorCoverage) {
  const int reps = 2000;
  int covered = 0;
  std::vector<double> y(99);
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(6, static_cast<std::uint64_t>(rep)));
    for (double& v : y) v = rng.normal();
    const double fresh = rng.normal();
    const ConformalResult r =
        conformal_interval(response_only(y), Vector::Zero(1), 0.1, PredictorSpec::mean());
    covered += (r.lo <= fresh && fresh <= r.hi) ? 1 : 0;
    if (rep == 0) {
      // Roughly the central 90% range of the sample.
      std::vector<double> s = y;
      std::sort(s.begin(), s.end());
      EXPECT_NEAR(r.lo, s[4], 0.5);
      EXPECT_NEAR(r.hi, s[94], 0.5);
    }
  }
  EXPECT_GE(static_cast<double>(covered) / reps, 0.9 - 3.0 * std::sqrt(0.09 / reps));
}

TEST(ConformalInterval, ExactFitContainsTruth) {
  Rng rng(7);
  Matrix x(12, 2);
  for (Index i = 0; i < 12; ++i) x.row(i) << rng.normal(), rng.normal();
  const Vector y = (x * Eigen::Vector2d(1.5, -0.5)).array() + 2.0;
  const Dataset d(x, y, oracle::names(2));
  const Vector x_new = x.row(3).transpose();
  const ConformalResult r = conformal_interval(d, x_new, 0.5, PredictorSpec::ols_full());
  EXPECT_LE(r.lo, y(3));
  EXPECT_GE(r.hi, y(3));
}

TEST(ConformalInterval, NestedInAlphaAtMatchingGrid) {
  Rng rng(8);
  const Dataset d = linear_data(rng, 40, 3, 1.0);
  GridSpec grid;
  grid.half_width = 30.0;
  const Vector x_new = Vector::Constant(3, 0.5);
  const ConformalResult wide = conformal_interval(d, x_new, 0.05, PredictorSpec::ols_full(), grid);
  const ConformalResult mid = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_full(), grid);
  const ConformalResult narrow = conformal_interval(d, x_new, 0.3, PredictorSpec::ols_full(), grid);
  EXPECT_EQ(wide.grid, narrow.grid);
  EXPECT_LE(wide.lo, mid.lo);
  EXPECT_GE(wide.hi, mid.hi);
  EXPECT_LE(mid.lo, narrow.lo);
  EXPECT_GE(mid.hi, narrow.hi);
}

TEST(ConformalInterval, GridRefinementStable) {
  Rng rng(9);
  const Dataset d = linear_data(rng, 40, 3, 1.0);
  const Vector x_new = Vector::Constant(3, -0.2);
  GridSpec coarse;
  coarse.points = 501;
  coarse.half_width = 12.0;
  GridSpec fine = coarse;
  fine.points = 1001;
  const ConformalResult a = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_full(), coarse);
  const ConformalResult b = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_full(), fine);
  EXPECT_LE(std::abs(a.lo - b.lo), a.step + 1e-12);
  EXPECT_LE(std::abs(a.hi - b.hi), a.step + 1e-12);
}

TEST(ConformalInterval, PermutationSymmetry) {
  Rng rng(10);
  const Dataset d = linear_data(rng, 30, 3, 1.0);
  std::vector<Index> order(30);
  for (Index i = 0; i < 30; ++i) order[static_cast<std::size_t>(i)] = (i * 7 + 3) % 30;
  const Dataset shuffled = d.rows(order);
  const Vector x_new = Vector::Constant(3, 0.1);
  for (const PredictorSpec& spec :
       {PredictorSpec::mean(), PredictorSpec::ols_full(), PredictorSpec::lasso(0.1)}) {
    const ConformalResult a = conformal_interval(d, x_new, 0.1, spec);
    const ConformalResult b = conformal_interval(shuffled, x_new, 0.1, spec);
    EXPECT_EQ(a.p_values, b.p_values) << spec.label();
  }
}

TEST(ConformalPvalue, ValidAtTrueResponse) {
  const int reps = 5000;
  int below[3] = {0, 0, 0};
  const double us[3] = {0.05, 0.1, 0.25};
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(11, static_cast<std::uint64_t>(rep)));
    const Dataset d = linear_data(rng, 19, 2, 1.0);
    const Vector x_new = Eigen::Vector2d(rng.normal(), rng.normal());
    const double y_new = 2.0 * x_new(0) + rng.normal();
    const double p = conformal_pvalue(d, x_new, y_new, PredictorSpec::ols_full());
    for (int k = 0; k < 3; ++k) below[k] += p <= us[k] ? 1 : 0;
  }
  for (int k = 0; k < 3; ++k) {
    const double rate = static_cast<double>(below[k]) / reps;
    EXPECT_LE(rate, us[k] + 3.0 * std::sqrt(us[k] * (1.0 - us[k]) / reps)) << us[k];
  }
}

TEST(ConformalInterval, ErrorsOnBadInputs) {
  Rng rng(12);
  const Dataset d = linear_data(rng, 10, 2, 1.0);
  EXPECT_THROW(conformal_interval(d, Vector::Zero(3), 0.1, PredictorSpec::ols_full()), Error);
  EXPECT_THROW(conformal_interval(d, Vector::Zero(2), 1.5, PredictorSpec::ols_full()), Error);
  EXPECT_THROW(conformal_interval(d, Vector::Zero(2), 0.1, PredictorSpec::ols_subset({5})), Error);
}

TEST(LambdaChoice, SingletonPath) {
  Rng rng(13);
  const Dataset d = linear_data(rng, 30, 3, 1.0);
  LassoPath path;
  path.lambdas = {0.25};
  const LambdaChoice c = choose_lambda_by_length(d, Vector::Zero(3), 0.1, path);
  EXPECT_EQ(c.index, 0u);
  EXPECT_EQ(c.lambda, 0.25);
  ASSERT_EQ(c.lengths.size(), 1u);
  EXPECT_DOUBLE_EQ(c.lengths[0], c.result.length);
}

TEST(LambdaChoice, StrongSignalKeepsIt) {
  int kept = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(14, static_cast<std::uint64_t>(s)));
    Matrix x(50, 5);
    Vector y(50);
    for (Index i = 0; i < 50; ++i) {
      for (Index j = 0; j < 5; ++j) x(i, j) = rng.normal();
      y(i) = 5.0 * x(i, 0) + 0.5 * rng.normal();
    }
    const Dataset d(x, y, oracle::names(5));
    const LassoPath path = lasso_path(d, 30, 1e-3);
    const LambdaChoice c = choose_lambda_by_length(d, Vector::Constant(5, 0.5), 0.1, path);
    kept += path.betas[c.index](0) != 0.0 ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(kept) / seeds, 0.95);
}

TEST(LambdaChoice, PureNoiseFavoursLargePenalty) {
  int large = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(15, static_cast<std::uint64_t>(s)));
    Matrix x(50, 5);
    Vector y(50);
    for (Index i = 0; i < 50; ++i) {
      for (Index j = 0; j < 5; ++j) x(i, j) = rng.normal();
      y(i) = rng.normal();
    }
    const Dataset d(x, y, oracle::names(5));
    const LassoPath path = lasso_path(d, 30, 1e-3);
    const LambdaChoice c = choose_lambda_by_length(d, Vector::Zero(5), 0.1, path);
    large += c.lambda >= 0.1 * path.lambdas.front() ? 1 : 0;
  }
  EXPECT_GT(large, seeds / 2);
}

TEST(VariableEffects, SignalAndNoise) {
  int signal_positive = 0;
  std::vector<double> noise_ratio, signal_ratio;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(16, static_cast<std::uint64_t>(s)));
    const Dataset d = linear_data(rng, 60, 2, 1.0);  // x1 signal, x2 noise
    const Vector x_new = Eigen::Vector2d(1.0, 0.0);
    const auto effects = variable_effect_lengths(d, x_new, 0.1, {0, 1});
    ASSERT_EQ(effects.size(), 2u);
    signal_positive += effects.at(0) > 0.0 ? 1 : 0;
    const ConformalResult base = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_subset({0, 1}));
    noise_ratio.push_back(std::abs(effects.at(1)) / base.length);
    signal_ratio.push_back(effects.at(0) / base.length);
  }
  EXPECT_GE(static_cast<double>(signal_positive) / seeds, 0.95);
  // Dropping the noise column moves the length by sampling noise only; dropping
  // the signal column widens it by a large fraction.
  std::sort(noise_ratio.begin(), noise_ratio.end());
  std::sort(signal_ratio.begin(), signal_ratio.end());
  EXPECT_LT(noise_ratio[noise_ratio.size() / 2], 0.05);
  EXPECT_GT(signal_ratio[signal_ratio.size() / 2], 0.2);
}

TEST(VariableEffects, SingleVariableComparesAgainstMean) {
  Rng rng(17);
  const Dataset d = linear_data(rng, 30, 2, 1.0);
  const Vector x_new = Eigen::Vector2d(0.7, 0.0);
  const auto effects = variable_effect_lengths(d, x_new, 0.1, {0});
  ASSERT_EQ(effects.size(), 1u);
  const double with = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_subset({0})).length;
  const double without = conformal_interval(d, x_new, 0.1, PredictorSpec::mean()).length;
  EXPECT_DOUBLE_EQ(effects.at(0), without - with);
  EXPECT_THROW(variable_effect_lengths(d, x_new, 0.1, {}), Error);
}
