#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agnostic/conformal.hpp"
#include "agnostic/harness.hpp"
#include "agnostic/riskbound.hpp"
#include "agnostic/selectors.hpp"

namespace agnostic::report {

/// Locale-independent shortest form with 12 significant digits.
std::string format_number(double value);
double parse_number(std::string_view text);

// Tab-separated tables, one header line, '\n' line endings.
std::string intervals_tsv(const std::vector<IntervalReport>& rows);
std::vector<IntervalReport> parse_intervals_tsv(std::string_view text);

std::string selection_tsv(const SelectedModel& model, const std::vector<std::string>& names);
std::string cp_trace_tsv(const CpTrace& trace, const std::vector<std::string>& names);
std::string lasso_path_tsv(const LassoPath& path, const std::vector<std::string>& names);
std::string conformal_grid_tsv(const ConformalResult& result);
std::string conformal_summary_tsv(const ConformalResult& result, bool bounded = true);
std::string lambda_choice_tsv(const LambdaChoice& choice, const LassoPath& path,
                              const std::vector<std::string>& names);
std::string bound_check_tsv(const BoundCheckReport& report, const BoundInputs& inputs,
                            std::string_view dgp_name);

/// Two-panel interval forest: horizontal segments with point markers, one row
/// per label, a dashed line at zero in each panel.
std::string interval_forest_svg(const std::vector<IntervalReport>& left,
                                const std::vector<IntervalReport>& right,
                                std::string_view left_title, std::string_view right_title);

void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace agnostic::report
