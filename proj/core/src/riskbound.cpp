#include "agnostic/riskbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "agnostic/error.hpp"
#include "agnostic/parallel.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic {

void BoundInputs::validate() const {
  require(c_max > 0.0, "C must be positive");
  require(l1_budget > 0.0, "L must be positive");
  require(n >= 1, "n must be at least 1");
  require(p >= 1, "p must be at least 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

double excess_risk_bound(const BoundInputs& in) {
  in.validate();
  const double c2 = in.c_max * in.c_max;
  const double l4 = std::pow(in.l1_budget, 4);
  const double p = static_cast<double>(in.p);
  return std::sqrt(8.0 * c2 * l4 / static_cast<double>(in.n) * std::log(2.0 * p * p / in.delta));
}

Dgp make_dgp(std::string_view name, Index p, double c_max) {
  require(p >= 1, "dgp needs p >= 1");
  require(c_max > 0.0, "dgp needs C > 0");
  auto clip = [c_max](double v) { return std::clamp(v, -c_max, c_max); };
  auto fill_uniform = [p, c_max](Rng& rng, Eigen::Ref<Vector> x) {
    for (Index j = 0; j < p; ++j) x(j) = rng.uniform(-c_max, c_max);
  };

  Dgp dgp;
  dgp.name = std::string(name);
  dgp.p = p;
  dgp.c_max = c_max;
  if (name == "bounded-linear") {
    // Sparse weights with ‖w‖₁ = 1 so the signal itself stays inside [−C, C].
    Vector w = Vector::Zero(p);
    const double base[] = {0.5, -0.3, 0.2};
    for (Index j = 0; j < std::min<Index>(p, 3); ++j) w(j) = base[j];
    w /= w.lpNorm<1>();
    dgp.draw = [=](Rng& rng, Eigen::Ref<Vector> x) {
      fill_uniform(rng, x);
      return clip(w.dot(x) + rng.uniform(-0.3 * c_max, 0.3 * c_max));
    };
  } else if (name == "bounded-sign") {
    dgp.draw = [=](Rng& rng, Eigen::Ref<Vector> x) {
      fill_uniform(rng, x);
      const double sign = x(0) > 0.0 ? 1.0 : (x(0) < 0.0 ? -1.0 : 0.0);
      return clip(c_max * sign + rng.uniform(-0.5 * c_max, 0.5 * c_max));
    };
  } else if (name == "bounded-sine") {
    dgp.draw = [=](Rng& rng, Eigen::Ref<Vector> x) {
      fill_uniform(rng, x);
      return clip(c_max * std::sin(std::numbers::pi * x(0) / c_max) +
                  rng.uniform(-0.3 * c_max, 0.3 * c_max));
    };
  } else {
    fail(ErrorCode::InvalidArgument,
         "unknown dgp '" + std::string(name) +
             "' (expected bounded-linear, bounded-sign or bounded-sine)");
  }
  return dgp;
}

void draw_sample(const Dgp& dgp, Rng& rng, Index count, Matrix& x, Vector& y) {
  require(static_cast<bool>(dgp.draw), "dgp has no sampler");
  x.resize(count, dgp.p);
  y.resize(count);
  Vector row(dgp.p);
  for (Index i = 0; i < count; ++i) {
    const double yi = dgp.draw(rng, row);
    if (!(std::abs(yi) <= dgp.c_max) || !(row.cwiseAbs().maxCoeff() <= dgp.c_max)) {
      fail(ErrorCode::OutOfBounds, "dgp '" + dgp.name + "' produced a value outside [-C, C]");
    }
    x.row(i) = row.transpose();
    y(i) = yi;
  }
}

RiskMoments RiskMoments::from_sample(const Matrix& x, const Vector& y) {
  require(x.rows() == y.size() && x.rows() > 0, "risk moments need a nonempty sample");
  const double n = static_cast<double>(x.rows());
  RiskMoments m;
  m.gram = x.transpose() * x / n;
  m.xty = x.transpose() * y / n;
  m.yty = y.squaredNorm() / n;
  m.size = x.rows();
  return m;
}

double RiskMoments::risk(const Vector& beta) const {
  return yty - 2.0 * xty.dot(beta) + beta.dot(gram * beta);
}

Vector project_l1_ball(const Vector& v, double radius) {
  require(radius > 0.0, "ball radius must be positive");
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(v.size());
  for (Index j = 0; j < v.size(); ++j) u[static_cast<std::size_t>(j)] = std::abs(v(j));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vector w(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double mag = std::max(std::abs(v(j)) - theta, 0.0);
    w(j) = v(j) < 0.0 ? -mag : mag;
  }
  return w;
}

RiskMinimizer minimize_risk_l1(const RiskMoments& moments, double radius, double tolerance,
                               int max_iterations) {
  const Index p = moments.gram.cols();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(moments.gram, Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;

  Vector beta = Vector::Zero(p);
  Vector momentum = beta;
  double t = 1.0;
  RiskMinimizer out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector grad = 2.0 * (moments.gram * momentum - moments.xty);
    Vector next = project_l1_ball(momentum - step * grad, radius);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart the momentum whenever the risk goes up.
    if (moments.risk(next) > moments.risk(beta)) {
      momentum = beta;
      t = 1.0;
      continue;
    }
    momentum = next + ((t - 1.0) / t_next) * (next - beta);
    beta = std::move(next);
    t = t_next;
    out.iterations = it;
    if (change < tolerance) break;
  }
  out.risk = moments.risk(beta);
  out.beta = std::move(beta);
  return out;
}

BoundCheckReport verify_bound(const Dgp& dgp, const BoundInputs& inputs, Index reps,
                              std::uint64_t seed, const VerifyOptions& options) {
  inputs.validate();
  require(reps >= 100, "verify_bound needs at least 100 replicates");
  require(dgp.p == inputs.p, "dgp dimension does not match p");
  require(std::abs(dgp.c_max - inputs.c_max) <= 1e-12 * inputs.c_max,
          "dgp bound does not match C");
  require(options.holdout_size >= 1, "holdout must be nonempty");

  BoundCheckReport report;
  report.bound_value = excess_risk_bound(inputs);
  report.reps = reps;
  report.holdout_size = options.holdout_size;

  Matrix hx;
  Vector hy;
  Rng holdout_rng(derive_seed(seed, 0));
  draw_sample(dgp, holdout_rng, options.holdout_size, hx, hy);
  const RiskMoments holdout = RiskMoments::from_sample(hx, hy);
  report.risk_star = minimize_risk_l1(holdout, inputs.l1_budget).risk;

  std::vector<std::string> names;
  for (Index j = 0; j < inputs.p; ++j) names.push_back("x" + std::to_string(j + 1));

  std::vector<double> excess(static_cast<std::size_t>(reps));
  parallel_for(excess.size(), [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep + 1));
    Matrix x;
    Vector y;
    draw_sample(dgp, rng, inputs.n, x, y);
    const Dataset train(std::move(x), std::move(y), names);
    const SelectedModel fit = lasso_constrained(train, inputs.l1_budget);
    excess[rep] = holdout.risk(fit.beta_hat) - report.risk_star;
  });

  double total = 0.0;
  report.max_excess = -std::numeric_limits<double>::infinity();
  for (double e : excess) {
    total += e;
    report.max_excess = std::max(report.max_excess, e);
    if (e > report.bound_value) ++report.violations;
  }
  report.mean_excess = total / static_cast<double>(reps);
  report.violation_rate = static_cast<double>(report.violations) / static_cast<double>(reps);
  return report;
}

}  // namespace agnostic
