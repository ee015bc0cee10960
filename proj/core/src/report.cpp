#include "agnostic/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "agnostic/error.hpp"

namespace agnostic::report {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

IntervalMethod parse_method(std::string_view text) {
  for (auto m : {IntervalMethod::Normal, IntervalMethod::OrderStatistic, IntervalMethod::LeastSquares}) {
    if (to_string(m) == text) return m;
  }
  fail(ErrorCode::InvalidArgument, "unknown interval method '" + std::string(text) + "'");
}

std::optional<int> parse_correction(std::string_view text) {
  if (text == "none") return std::nullopt;
  constexpr std::string_view prefix = "bonferroni(";
  if (text.starts_with(prefix) && text.ends_with(")")) {
    const std::string_view digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown correction '" + std::string(text) + "'");
}

// Compact, fixed-precision tick labels.
std::string tick(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
  return std::string(buf, res.ptr);
}

struct Panel {
  double x0, width;
  double lo, hi;
  double map(double v) const { return x0 + (v - lo) / (hi - lo) * width; }
};

void draw_panel(std::ostringstream& svg, const std::vector<IntervalReport>& rows,
                std::string_view title, double left, double top, double label_width,
                double plot_width, double row_height) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : rows) {
    if (std::isfinite(r.lower)) lo = std::min(lo, r.lower);
    if (std::isfinite(r.upper)) hi = std::max(hi, r.upper);
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  const Panel panel{left + label_width, plot_width, lo - pad, hi + pad};
  const double bottom = top + row_height * static_cast<double>(std::max<std::size_t>(rows.size(), 1));

  svg << "<text x=\"" << tick(left + label_width + plot_width / 2) << "\" y=\"" << tick(top - 14)
      << "\" text-anchor=\"middle\" font-weight=\"bold\">" << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << tick(panel.x0) << "\" y=\"" << tick(top) << "\" width=\""
      << tick(plot_width) << "\" height=\"" << tick(bottom - top)
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  const double zero = panel.map(0.0);
  svg << "<line x1=\"" << tick(zero) << "\" y1=\"" << tick(top) << "\" x2=\"" << tick(zero)
      << "\" y2=\"" << tick(bottom) << "\" stroke=\"#999\" stroke-dasharray=\"4,3\"/>\n";
  for (double v : {panel.lo, 0.0, panel.hi}) {
    svg << "<text x=\"" << tick(panel.map(v)) << "\" y=\"" << tick(bottom + 16)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = top + row_height * (static_cast<double>(i) + 0.5);
    svg << "<text x=\"" << tick(panel.x0 - 6) << "\" y=\"" << tick(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << xml_escape(r.label) << "</text>\n";
    const double a = panel.map(std::clamp(r.lower, panel.lo, panel.hi));
    const double b = panel.map(std::clamp(r.upper, panel.lo, panel.hi));
    svg << "<line x1=\"" << tick(a) << "\" y1=\"" << tick(y) << "\" x2=\"" << tick(b)
        << "\" y2=\"" << tick(y) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<circle cx=\"" << tick(panel.map(r.estimate)) << "\" cy=\"" << tick(y)
        << "\" r=\"3.5\" fill=\"black\"/>\n";
  }
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::InvalidArgument, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string intervals_tsv(const std::vector<IntervalReport>& rows) {
  std::string out = "label\testimate\tlower\tupper\tlevel\tcorrection\tmethod\n";
  for (const auto& r : rows) {
    out += r.label + '\t' + format_number(r.estimate) + '\t' + format_number(r.lower) + '\t' +
           format_number(r.upper) + '\t' + format_number(r.level) + '\t' + r.correction() + '\t' +
           std::string(to_string(r.method)) + '\n';
  }
  return out;
}

std::vector<IntervalReport> parse_intervals_tsv(std::string_view text) {
  std::vector<IntervalReport> rows;
  bool header = true;
  for (std::string_view line : split(text, '\n')) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split(line, '\t');
    if (cells.size() != 7) fail(ErrorCode::InvalidArgument, "interval row needs 7 cells");
    IntervalReport r;
    r.label = std::string(cells[0]);
    r.estimate = parse_number(cells[1]);
    r.lower = parse_number(cells[2]);
    r.upper = parse_number(cells[3]);
    r.level = parse_number(cells[4]);
    r.bonferroni = parse_correction(cells[5]);
    r.method = parse_method(cells[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string selection_tsv(const SelectedModel& model, const std::vector<std::string>& names) {
  std::string out = "variable\tindex\tbeta_hat\n";
  out += "(Intercept)\t-\t" + format_number(model.intercept) + '\n';
  for (Index j : model.subset) {
    out += names.at(static_cast<std::size_t>(j)) + '\t' + std::to_string(j) + '\t' +
           format_number(model.beta_hat(j)) + '\n';
  }
  return out;
}

std::string cp_trace_tsv(const CpTrace& trace, const std::vector<std::string>& names) {
  std::string out = "k\tentered\trss\tcp\tchosen\n";
  for (std::size_t k = 0; k < trace.rss.size(); ++k) {
    const std::string entered =
        k == 0 ? "-" : names.at(static_cast<std::size_t>(trace.order.at(k - 1)));
    out += std::to_string(k) + '\t' + entered + '\t' + format_number(trace.rss[k]) + '\t' +
           format_number(trace.cp[k]) + '\t' +
           (static_cast<Index>(k) == trace.chosen_k ? "1" : "0") + '\n';
  }
  out += "# sigma2_hat\t" + format_number(trace.sigma2_hat) + '\t' + trace.sigma2_source + '\n';
  return out;
}

std::string lasso_path_tsv(const LassoPath& path, const std::vector<std::string>& names) {
  std::string out = "lambda\tl1_norm\tsweeps\tintercept";
  for (const auto& n : names) out += '\t' + n;
  out += '\n';
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    out += format_number(path.lambdas[k]) + '\t' + format_number(path.l1_norms[k]) + '\t' +
           std::to_string(path.sweeps[k]) + '\t' + format_number(path.intercepts[k]);
    for (Index j = 0; j < path.betas[k].size(); ++j) out += '\t' + format_number(path.betas[k](j));
    out += '\n';
  }
  return out;
}

std::string conformal_grid_tsv(const ConformalResult& result) {
  std::string out = "y\tp_value\n";
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    out += format_number(result.grid[i]) + '\t' + format_number(result.p_values[i]) + '\n';
  }
  return out;
}

std::string conformal_summary_tsv(const ConformalResult& result, bool bounded) {
  std::string out = "lo\thi\tlength\talpha\tcenter\tstep\tdoublings\tbounded\n";
  out += format_number(result.lo) + '\t' + format_number(result.hi) + '\t' +
         format_number(result.length) + '\t' + format_number(result.alpha) + '\t' +
         format_number(result.center) + '\t' + format_number(result.step) + '\t' +
         std::to_string(result.doublings) + '\t' + (bounded ? "1" : "0") + '\n';
  return out;
}

std::string lambda_choice_tsv(const LambdaChoice& choice, const LassoPath& path,
                              const std::vector<std::string>& names) {
  std::string out = "lambda\tl1_norm\tlength\tchosen\tsupport\n";
  for (std::size_t k = 0; k < choice.lengths.size(); ++k) {
    std::string support;
    for (Index j = 0; j < path.betas[k].size(); ++j) {
      if (path.betas[k](j) == 0.0) continue;
      if (!support.empty()) support += ',';
      support += names.at(static_cast<std::size_t>(j));
    }
    out += format_number(path.lambdas[k]) + '\t' + format_number(path.l1_norms[k]) + '\t' +
           format_number(choice.lengths[k]) + '\t' + (k == choice.index ? "1" : "0") + '\t' +
           (support.empty() ? "-" : support) + '\n';
  }
  return out;
}

std::string bound_check_tsv(const BoundCheckReport& r, const BoundInputs& in,
                            std::string_view dgp_name) {
  std::string out =
      "dgp\tC\tL\tn\tp\tdelta\tbound\treps\tviolations\tviolation_rate\tholdout\trisk_star\t"
      "mean_excess\tmax_excess\n";
  out += std::string(dgp_name) + '\t' + format_number(in.c_max) + '\t' +
         format_number(in.l1_budget) + '\t' + std::to_string(in.n) + '\t' + std::to_string(in.p) +
         '\t' + format_number(in.delta) + '\t' + format_number(r.bound_value) + '\t' +
         std::to_string(r.reps) + '\t' + std::to_string(r.violations) + '\t' +
         format_number(r.violation_rate) + '\t' + std::to_string(r.holdout_size) + '\t' +
         format_number(r.risk_star) + '\t' + format_number(r.mean_excess) + '\t' +
         format_number(r.max_excess) + '\n';
  return out;
}

std::string interval_forest_svg(const std::vector<IntervalReport>& left,
                                const std::vector<IntervalReport>& right,
                                std::string_view left_title, std::string_view right_title) {
  constexpr double label_width = 150.0;
  constexpr double plot_width = 280.0;
  constexpr double row_height = 26.0;
  constexpr double top = 40.0;
  constexpr double gap = 30.0;
  const auto rows = static_cast<double>(std::max<std::size_t>({left.size(), right.size(), 1}));
  const double width = 2.0 * (label_width + plot_width) + gap + 20.0;
  const double height = top + rows * row_height + 40.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << tick(width) << "\" height=\""
      << tick(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw_panel(svg, left, left_title, 0.0, top, label_width, plot_width, row_height);
  draw_panel(svg, right, right_title, label_width + plot_width + gap, top, label_width, plot_width,
             row_height);
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::InvalidArgument, "failed writing '" + path.string() + "'");
}

}  // namespace agnostic::report
