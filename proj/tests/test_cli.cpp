#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "agnostic/cli.hpp"
#include "agnostic/report.hpp"
#include "agnostic/rng.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kWine = AGNOSTIC_DATA_DIR "/winequality-red.csv";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = agnostic::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> table(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '\t');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("agnostic_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

std::string signal_csv(std::uint64_t seed, int n, bool signal) {
  agnostic::Rng rng(seed);
  std::ostringstream s;
  s << "x1,x2,x3,y\n";
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    const double y = (signal ? 5.0 * a : 0.0) + (signal ? 0.5 : 1.0) * rng.normal();
    s << agnostic::report::format_number(a) << ',' << agnostic::report::format_number(b) << ','
      << agnostic::report::format_number(c) << ',' << agnostic::report::format_number(y) << '\n';
  }
  return s.str();
}

}  // namespace

TEST_F(CliTest, HarnessOnWine) {
  const Outcome r = run({"harness", "--input", kWine, "--response", "quality", "--out", out("h"), "--plot"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"selection.tsv", "risk.tsv", "inflation.tsv", "projected.tsv", "trace.tsv",
                        "intervals.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / "h" / f)) << f;
  }
  const auto risk = agnostic::report::parse_intervals_tsv(slurp(dir_ / "h" / "risk.tsv"));
  ASSERT_GE(risk.size(), 2u);
  EXPECT_EQ(risk[0].label, "selected");
  EXPECT_EQ(risk[1].label, "null");
  EXPECT_LT(risk[0].upper, risk[1].lower);
  const std::string svg = slurp(dir_ / "h" / "intervals.svg");
  EXPECT_NE(svg.find("Alcohol"), std::string::npos);
  EXPECT_EQ(svg.find("(Intercept)"), std::string::npos);
}

TEST_F(CliTest, HarnessRerunIsByteIdentical) {
  const std::vector<std::string> base{"harness", "--input", kWine, "--response", "quality",
                                      "--seed", "4", "--selector", "lasso", "--plot"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", out("a")});
  b.insert(b.end(), {"--out", out("b")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / entry.path().filename()))
        << entry.path().filename();
  }
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"harness", "--input", out("missing.csv"), "--response", "y"}).code, 1);
  const auto bad = write("bad.csv", "a,y\n1,2\nx,3\n");
  EXPECT_EQ(run({"harness", "--input", bad.string(), "--response", "y", "--out", out("o")}).code, 1);
  EXPECT_EQ(run({"harness", "--input", kWine, "--response", "nope", "--out", out("o")}).code, 1);
  EXPECT_EQ(run({"harness", "--input", kWine, "--response", "quality", "--bogus"}).code, 3);
  EXPECT_EQ(run({"harness", "--input", kWine, "--response", "quality", "--alpha", "1.5"}).code, 3);
  EXPECT_EQ(run({"harness", "--input", kWine, "--response", "quality", "--selector", "magic"}).code, 3);
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, SelectWritesSelectionAndTrace) {
  const Outcome r = run({"select", "--input", kWine, "--response", "quality", "--out", out("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sel = table(dir_ / "s" / "selection.tsv");
  EXPECT_EQ(sel[0], (std::vector<std::string>{"variable", "index", "beta_hat"}));
  EXPECT_EQ(sel[1][0], "(Intercept)");
  EXPECT_EQ(sel[2][0], "Alcohol");
  EXPECT_TRUE(fs::exists(dir_ / "s" / "trace.tsv"));
}

TEST_F(CliTest, ConformalMatchesEnumeration) {
  const std::vector<double> y{1, 2, 4, 7};
  const auto csv = write("tiny.csv", "x,y\n0,1\n0,2\n0,4\n0,7\n");
  const Outcome r = run({"conformal", "--input", csv.string(), "--response", "y", "--predictor",
                         "mean", "--x-new", "0", "--alpha", "0.4", "--out", out("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto grid = table(dir_ / "c" / "pvalues.tsv");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double trial = agnostic::report::parse_number(grid[i][0]);
    EXPECT_NEAR(agnostic::report::parse_number(grid[i][1]), oracle::mean_pvalue(y, trial), 1e-12);
  }
  // Exact accepted set by fine enumeration.
  double lo = 1e9, hi = -1e9;
  for (int k = -300000; k <= 400000; ++k) {
    const double t = k * 1e-4;
    if (oracle::mean_pvalue(y, t) >= 0.4) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  const auto summary = table(dir_ / "c" / "interval.tsv");
  const double got_lo = agnostic::report::parse_number(summary[1][0]);
  const double got_hi = agnostic::report::parse_number(summary[1][1]);
  const double step = agnostic::report::parse_number(summary[1][5]);
  EXPECT_LE(got_lo, lo + 1e-4);
  EXPECT_GE(got_lo, lo - 2.0 * step);
  EXPECT_GE(got_hi, hi - 1e-4);
  EXPECT_LE(got_hi, hi + 2.0 * step);
}

TEST_F(CliTest, ConformalXNewFile) {
  const auto csv = write("sig.csv", signal_csv(1, 40, true));
  const auto xnew = write("xnew.csv", "x3,y,x1,x2\n0.5,99,1.0,-0.25\n");
  const Outcome a = run({"conformal", "--input", csv.string(), "--response", "y", "--x-new-file",
                         xnew.string(), "--out", out("a")});
  const Outcome b = run({"conformal", "--input", csv.string(), "--response", "y", "--x-new",
                         "1.0,-0.25,0.5", "--out", out("b")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(dir_ / "a" / "interval.tsv"), slurp(dir_ / "b" / "interval.tsv"));
  const auto short_row = write("short.csv", "x1,x2\n1,2\n");
  EXPECT_EQ(run({"conformal", "--input", csv.string(), "--response", "y", "--x-new-file",
                 short_row.string(), "--out", out("c")})
                .code,
            1);
  EXPECT_EQ(run({"conformal", "--input", csv.string(), "--response", "y", "--x-new", "1,2",
                 "--out", out("c")})
                .code,
            3);
  EXPECT_EQ(run({"conformal", "--input", csv.string(), "--response", "y", "--out", out("c")}).code, 3);
}

TEST_F(CliTest, ConformalUnboundedExitsTwo) {
  const auto csv = write("n20.csv", signal_csv(2, 20, false));
  const Outcome r = run({"conformal", "--input", csv.string(), "--response", "y", "--x-new",
                         "0,0,0", "--alpha", "0.001", "--out", out("u")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("UnboundedInterval"), std::string::npos);
}

TEST_F(CliTest, LambdaPathKeepsSignal) {
  const auto csv = write("sig.csv", signal_csv(3, 60, true));
  const Outcome r = run({"conformal", "--input", csv.string(), "--response", "y", "--x-new",
                         "0.5,0.5,0.5", "--alpha", "0.1", "--lambda-path", "--out", out("l")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = table(dir_ / "l" / "lambda_choice.tsv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "l1_norm", "length", "chosen", "support"}));
  int chosen = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][3] == "1") {
      ++chosen;
      EXPECT_NE(rows[i][4].find("x1"), std::string::npos);
    }
  }
  EXPECT_EQ(chosen, 1);
  EXPECT_TRUE(fs::exists(dir_ / "l" / "pvalues.tsv"));
}

TEST_F(CliTest, BoundValueAndContracts) {
  const std::string delta = agnostic::report::format_number(2.0 / std::numbers::e);
  const Outcome r = run({"bound", "--C", "1", "--L", "1", "--n", "8", "--p", "1", "--delta", delta});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 1.0, 1e-11);
  EXPECT_EQ(run({"bound", "--n", "8", "--p", "1", "--delta", "1"}).code, 3);
  EXPECT_EQ(run({"bound", "--n", "8", "--p", "1", "--delta", "2.5"}).code, 3);
  EXPECT_EQ(run({"bound", "--n", "0", "--p", "1"}).code, 3);
  EXPECT_EQ(run({"bound", "--n", "8", "--p", "1", "--C", "-1"}).code, 3);
  EXPECT_EQ(run({"bound", "--n", "8"}).code, 3);
  EXPECT_EQ(run({"bound", "--n", "100", "--p", "5", "--verify", "--reps", "50"}).code, 3);
}

TEST_F(CliTest, BoundVerifyWritesTable) {
  const Outcome r = run({"bound", "--n", "100", "--p", "5", "--delta", "0.1", "--verify", "--reps",
                         "200", "--holdout", "20000", "--out", out("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = table(dir_ / "b" / "boundcheck.tsv");
  ASSERT_EQ(rows.size(), 2u);
  std::size_t col = 0;
  while (col < rows[0].size() && rows[0][col] != "violation_rate") ++col;
  ASSERT_LT(col, rows[0].size());
  EXPECT_LE(agnostic::report::parse_number(rows[1][col]), 0.1 + 3.0 * std::sqrt(0.09 / 200));
  EXPECT_EQ(rows[1][0], "bounded-sign");
}
