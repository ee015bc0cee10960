#include "agnostic/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "agnostic/conformal.hpp"
#include "agnostic/error.hpp"
#include "agnostic/harness.hpp"
#include "agnostic/report.hpp"
#include "agnostic/riskbound.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string input;
  std::string response;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct SelectorFlags {
  std::string selector = "stepwise";
  std::string lambda_rule = "cv";
  std::optional<double> lambda;
  std::optional<double> sigma2;
  bool no_standardize = false;
};

struct HarnessFlags {
  bool no_bonferroni = false;
  std::string risk_scale = "absolute";
  std::string covariance = "robust";
  bool refit = false;
  bool plot = false;
};

struct ConformalFlags {
  std::string x_new;
  std::string x_new_file;
  std::string predictor = "ols";
  std::string subset;
  double lambda = 0.0;
  int grid_points = 1000;
  int max_doublings = 10;
  bool lambda_path = false;
  int lambda_count = 100;
};

struct BoundFlags {
  double c_max = 1.0;
  double l1_budget = 1.0;
  Index p = 0;
  Index n = 0;
  double delta = 0.1;
  bool verify = false;
  Index reps = 500;
  std::string dgp = "bounded-sign";
  Index holdout = 50000;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Data: return 1;
    case ErrorKind::Numerical: return 2;
    case ErrorKind::Usage: return 3;
  }
  return 2;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

void add_common(CLI::App* cmd, Common& c, bool needs_input) {
  auto* input = cmd->add_option("--input", c.input, "CSV file with a header row");
  auto* response = cmd->add_option("--response", c.response, "Response column name");
  if (needs_input) {
    input->required();
    response->required();
  }
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void add_alpha(CLI::App* cmd, Common& c) {
  cmd->add_option("--alpha", c.alpha, "Miscoverage level in (0, 1)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void add_selector(CLI::App* cmd, SelectorFlags& s) {
  cmd->add_option("--selector", s.selector, "Model selector")
      ->capture_default_str()
      ->check(CLI::IsMember({"stepwise", "lasso"}));
  cmd->add_option("--lambda-rule", s.lambda_rule, "Lasso penalty rule")
      ->capture_default_str()
      ->check(CLI::IsMember({"cv", "fixed", "conformal-length"}));
  cmd->add_option("--lambda", s.lambda, "Lasso penalty for --lambda-rule fixed");
  cmd->add_option("--sigma2", s.sigma2, "Noise variance for Mallows Cp");
  cmd->add_flag("--no-standardize", s.no_standardize, "Keep predictors on their raw scale");
}

SelectorConfig selector_config(const SelectorFlags& s) {
  SelectorConfig config;
  config.id = s.selector;
  config.stepwise.sigma2 = s.sigma2;
  if (s.lambda_rule == "fixed") {
    if (!s.lambda) fail(ErrorCode::InvalidArgument, "--lambda-rule fixed needs --lambda");
    config.lambda_rule = LambdaRule::Fixed;
    config.lambda = *s.lambda;
  } else if (s.lambda_rule == "conformal-length") {
    config.lambda_rule = LambdaRule::ConformalLength;
  } else {
    config.lambda_rule = LambdaRule::CrossValidation;
  }
  return config;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::InvalidArgument, "cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

std::string trace_tsv(const SelectedModel& model, const std::vector<std::string>& names) {
  if (model.diagnostics.cp) return report::cp_trace_tsv(*model.diagnostics.cp, names);
  if (model.diagnostics.path) return report::lasso_path_tsv(*model.diagnostics.path, names);
  return "lambda\tl1_norm\tsweeps\tintercept\n";
}

std::string subset_names(const std::vector<Index>& subset, const std::vector<std::string>& names) {
  std::string out;
  for (Index j : subset) {
    if (!out.empty()) out += ',';
    out += names[static_cast<std::size_t>(j)];
  }
  return out.empty() ? "(empty)" : out;
}

std::string describe(const IntervalReport& r) {
  return report::format_number(r.estimate) + " [" + report::format_number(r.lower) + ", " +
         report::format_number(r.upper) + "]";
}

int cmd_harness(const Common& c, const SelectorFlags& s, const HarnessFlags& h, std::ostream& out) {
  const Dataset data = load_csv(c.input, c.response);
  HarnessConfig config;
  config.selector = selector_config(s);
  config.alpha = c.alpha;
  config.seed = c.seed;
  config.bonferroni = !h.no_bonferroni;
  config.scale = h.risk_scale == "squared" ? RiskScale::Squared : RiskScale::Absolute;
  config.covariance = h.covariance == "classical" ? CovarianceKind::Classical : CovarianceKind::Robust;
  config.standardize = !s.no_standardize;
  config.coefficients =
      h.refit ? CoefficientSource::RefitOnInferenceHalf : CoefficientSource::SelectionHalf;
  const fs::path dir = prepare_out(c.out);
  const HarnessResult result = run_harness(data, config);
  const auto& names = data.names();

  std::vector<IntervalReport> risk{result.risk.risk, result.risk.null_risk};
  if (result.median_risk) risk.push_back(*result.median_risk);
  std::vector<IntervalReport> inflation;
  if (result.inflation) {
    for (Index j : result.inflation->order) inflation.push_back(result.inflation->per_variable.at(j));
  }
  std::vector<IntervalReport> projected(result.projected.intervals.begin() + 1,
                                        result.projected.intervals.end());

  report::write_text(dir / "selection.tsv", report::selection_tsv(result.model, names));
  report::write_text(dir / "risk.tsv", report::intervals_tsv(risk));
  report::write_text(dir / "inflation.tsv", report::intervals_tsv(inflation));
  report::write_text(dir / "projected.tsv", report::intervals_tsv(result.projected.intervals));
  report::write_text(dir / "trace.tsv", trace_tsv(result.model, names));
  if (h.plot) {
    report::write_text(dir / "intervals.svg",
                       report::interval_forest_svg(inflation, projected, "Risk inflation R_j",
                                                   "Projected parameters"));
  }

  out << "selected: " << subset_names(result.model.subset, names) << '\n';
  out << "risk: " << describe(result.risk.risk) << '\n';
  out << "null risk: " << describe(result.risk.null_risk) << '\n';
  return 0;
}

int cmd_select(const Common& c, const SelectorFlags& s, std::ostream& out) {
  const Dataset raw = load_csv(c.input, c.response);
  const Dataset data = s.no_standardize ? raw : standardize(raw, raw).train;
  const fs::path dir = prepare_out(c.out);
  const SelectedModel model = select(data, selector_config(s));
  report::write_text(dir / "selection.tsv", report::selection_tsv(model, data.names()));
  report::write_text(dir / "trace.tsv", trace_tsv(model, data.names()));
  out << "selected: " << subset_names(model.subset, data.names()) << '\n';
  return 0;
}

Vector read_x_new(const ConformalFlags& f, const Dataset& data, const std::string& response) {
  const Index p = data.p();
  Vector x(p);
  if (!f.x_new.empty()) {
    const auto items = split_list(f.x_new);
    if (static_cast<Index>(items.size()) != p) {
      fail(ErrorCode::InvalidArgument, "--x-new has " + std::to_string(items.size()) +
                                           " values, expected " + std::to_string(p));
    }
    for (Index j = 0; j < p; ++j) x(j) = report::parse_number(items[static_cast<std::size_t>(j)]);
    return x;
  }
  std::ifstream in(f.x_new_file, std::ios::binary);
  if (!in) fail(ErrorCode::MissingFile, "cannot open '" + f.x_new_file + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with("\xEF\xBB\xBF")) line = line.substr(3);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() != 2) fail(ErrorCode::InvalidDataset, "x-new file must hold a header and one row");
  const auto header = split_list(lines[0]);
  const auto cells = split_list(lines[1]);
  if (header.size() != cells.size()) fail(ErrorCode::InvalidDataset, "x-new row width mismatch");
  std::map<std::string, double> values;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const std::string name = unquote(header[k]);
    if (name == response) continue;
    try {
      values[name] = report::parse_number(unquote(cells[k]));
    } catch (const Error&) {
      fail(ErrorCode::NonNumericCell, "x-new column '" + name + "' is not numeric");
    }
  }
  for (Index j = 0; j < p; ++j) {
    const auto it = values.find(data.names()[static_cast<std::size_t>(j)]);
    if (it == values.end()) {
      fail(ErrorCode::MissingColumn, "x-new file lacks column '" + data.names()[static_cast<std::size_t>(j)] + "'");
    }
    x(j) = it->second;
  }
  return x;
}

PredictorSpec predictor_spec(const ConformalFlags& f, const Dataset& data) {
  if (f.predictor == "mean") return PredictorSpec::mean();
  if (f.predictor == "lasso") return PredictorSpec::lasso(f.lambda);
  if (f.predictor == "ols-subset") {
    std::vector<Index> subset;
    if (!f.subset.empty()) {
      for (const auto& name : split_list(f.subset)) subset.push_back(data.column(name));
    }
    return PredictorSpec::ols_subset(std::move(subset));
  }
  return PredictorSpec::ols_full();
}

int cmd_conformal(const Common& c, const ConformalFlags& f, std::ostream& out) {
  if (f.x_new.empty() == f.x_new_file.empty()) {
    fail(ErrorCode::InvalidArgument, "give exactly one of --x-new or --x-new-file");
  }
  const Dataset data = load_csv(c.input, c.response);
  const Vector x_new = read_x_new(f, data, c.response);
  GridSpec grid;
  grid.points = f.grid_points;
  grid.max_doublings = f.max_doublings;
  const fs::path dir = prepare_out(c.out);

  ConformalResult result;
  if (f.lambda_path) {
    const LassoPath path = lasso_path(data, f.lambda_count);
    const LambdaChoice choice = choose_lambda_by_length(data, x_new, c.alpha, path, grid);
    report::write_text(dir / "lambda_choice.tsv",
                       report::lambda_choice_tsv(choice, path, data.names()));
    out << "lambda: " << report::format_number(choice.lambda) << '\n';
    result = choice.result;
  } else {
    result = conformal_interval(data, x_new, c.alpha, predictor_spec(f, data), grid);
  }
  report::write_text(dir / "pvalues.tsv", report::conformal_grid_tsv(result));
  report::write_text(dir / "interval.tsv", report::conformal_summary_tsv(result));
  out << "interval: [" << report::format_number(result.lo) << ", "
      << report::format_number(result.hi) << "] length " << report::format_number(result.length)
      << '\n';
  return 0;
}

int cmd_bound(const Common& c, const BoundFlags& b, std::ostream& out) {
  BoundInputs inputs;
  inputs.c_max = b.c_max;
  inputs.l1_budget = b.l1_budget;
  inputs.n = b.n;
  inputs.p = b.p;
  inputs.delta = b.delta;
  out << report::format_number(excess_risk_bound(inputs)) << '\n';
  if (!b.verify) return 0;
  const Dgp dgp = make_dgp(b.dgp, b.p, b.c_max);
  VerifyOptions options;
  options.holdout_size = b.holdout;
  const fs::path dir = prepare_out(c.out);
  const BoundCheckReport check = verify_bound(dgp, inputs, b.reps, c.seed, options);
  report::write_text(dir / "boundcheck.tsv", report::bound_check_tsv(check, inputs, b.dgp));
  out << "violation_rate: " << report::format_number(check.violation_rate) << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution-free inference after model selection", "agnostic"};
  app.require_subcommand(1, 1);

  Common common;
  SelectorFlags selector;
  HarnessFlags harness;
  ConformalFlags conformal;
  BoundFlags bound;

  auto* h = app.add_subcommand("harness", "Split, select on one half, infer on the other");
  add_common(h, common, true);
  add_alpha(h, common);
  add_selector(h, selector);
  h->add_flag("--no-bonferroni", harness.no_bonferroni, "Skip the Bonferroni correction");
  h->add_option("--risk-scale", harness.risk_scale, "Loss scale")
      ->capture_default_str()
      ->check(CLI::IsMember({"absolute", "squared"}));
  h->add_option("--covariance", harness.covariance, "Covariance for projected parameters")
      ->capture_default_str()
      ->check(CLI::IsMember({"robust", "classical"}));
  h->add_flag("--refit-on-inference", harness.refit,
              "Refit the selected coefficients by OLS on the inference half");
  h->add_flag("--plot", harness.plot, "Also write intervals.svg");

  auto* s = app.add_subcommand("select", "Run a selector on the full data");
  add_common(s, common, true);
  add_selector(s, selector);

  auto* c = app.add_subcommand("conformal", "Full conformal prediction interval at one point");
  add_common(c, common, true);
  add_alpha(c, common);
  c->add_option("--x-new", conformal.x_new, "Comma-separated predictor values");
  c->add_option("--x-new-file", conformal.x_new_file, "One-row CSV with predictor columns");
  c->add_option("--predictor", conformal.predictor, "Point predictor")
      ->capture_default_str()
      ->check(CLI::IsMember({"mean", "ols", "ols-subset", "lasso"}));
  c->add_option("--subset", conformal.subset, "Comma-separated columns for ols-subset");
  c->add_option("--lambda", conformal.lambda, "Penalty for the lasso predictor")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--grid-points", conformal.grid_points, "Trial values per grid")
      ->capture_default_str()
      ->check(CLI::Range(3, 10000000));
  c->add_option("--max-doublings", conformal.max_doublings, "Grid widening cap")
      ->capture_default_str()
      ->check(CLI::Range(0, 60));
  c->add_flag("--lambda-path", conformal.lambda_path,
              "Choose the lasso penalty by shortest interval; writes lambda_choice.tsv");
  c->add_option("--lambda-count", conformal.lambda_count, "Penalties on the lasso path")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));

  auto* b = app.add_subcommand("bound", "Excess-risk bound for the l1-constrained estimator");
  add_common(b, common, false);
  b->add_option("--C", bound.c_max, "Bound on |X_j| and |Y|")->capture_default_str();
  b->add_option("--L", bound.l1_budget, "l1 budget")->capture_default_str();
  b->add_option("--p", bound.p, "Number of predictors")->required();
  b->add_option("--n", bound.n, "Sample size")->required();
  b->add_option("--delta", bound.delta, "Failure probability")->capture_default_str();
  b->add_flag("--verify", bound.verify, "Monte Carlo check; writes boundcheck.tsv");
  b->add_option("--reps", bound.reps, "Monte Carlo replicates")->capture_default_str();
  b->add_option("--dgp", bound.dgp, "Bounded data-generating process")
      ->capture_default_str()
      ->check(CLI::IsMember({"bounded-linear", "bounded-sign", "bounded-sine"}));
  b->add_option("--holdout", bound.holdout, "Holdout draws for the best-in-class risk")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }

  try {
    if (h->parsed()) return cmd_harness(common, selector, harness, out);
    if (s->parsed()) return cmd_select(common, selector, out);
    if (c->parsed()) return cmd_conformal(common, conformal, out);
    return cmd_bound(common, bound, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.row) err << "  at data row " << *e.row + 1 << ", column " << e.column.value_or(0) + 1 << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace agnostic::cli
