#include "agnostic/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "agnostic/error.hpp"
#include "agnostic/rng.hpp"

namespace agnostic {

Dataset::Dataset(Matrix x, Vector y, std::vector<std::string> names)
    : x_(std::move(x)), y_(std::move(y)), names_(std::move(names)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    fail(ErrorCode::InvalidDataset, "dataset needs n >= 1 and p >= 1");
  }
  if (y_.size() != x_.rows()) {
    fail(ErrorCode::InvalidDataset, "response length does not match row count");
  }
  if (static_cast<Index>(names_.size()) != x_.cols()) {
    fail(ErrorCode::InvalidDataset, "expected one name per column");
  }
  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      fail(ErrorCode::DuplicateColumn, "duplicate column name '" + name + "'");
    }
  }
  for (Index i = 0; i < x_.rows(); ++i) {
    for (Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(i, j))) {
        Error err(ErrorCode::NonFiniteValue, "non-finite value at row " + std::to_string(i) +
                                                 ", column '" + names_[j] + "'");
        err.row = static_cast<std::size_t>(i);
        err.column = static_cast<std::size_t>(j);
        throw err;
      }
    }
    if (!std::isfinite(y_(i))) {
      Error err(ErrorCode::NonFiniteValue, "non-finite response at row " + std::to_string(i));
      err.row = static_cast<std::size_t>(i);
      throw err;
    }
  }
}

Index Dataset::column(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return static_cast<Index>(j);
  }
  fail(ErrorCode::MissingColumn, "no column named '" + std::string(name) + "'");
}

Dataset Dataset::rows(const std::vector<Index>& indices) const {
  Matrix x(static_cast<Index>(indices.size()), p());
  Vector y(static_cast<Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    x.row(static_cast<Index>(r)) = x_.row(indices[r]);
    y(static_cast<Index>(r)) = y_(indices[r]);
  }
  return Dataset(std::move(x), std::move(y), names_);
}

namespace {

using Record = std::vector<std::string>;

// RFC-4180 records: quoted fields may contain separators, newlines and "" escapes.
std::vector<Record> tokenize(std::string_view text, std::string_view origin) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_started = false;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty()) {
          fail(ErrorCode::InvalidDataset,
               std::string(origin) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_quoted = true;
        record_started = true;
        break;
      case ',':
        end_field();
        record_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (record_started || !field.empty()) end_record();
        break;
      default:
        field.push_back(ch);
        record_started = true;
    }
  }
  if (in_quotes) fail(ErrorCode::InvalidDataset, std::string(origin) + ": unterminated quote");
  if (record_started || !field.empty() || field_quoted) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col,
                  const std::string& col_name, std::string_view origin) {
  std::string_view s = trim(cell);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    Error err(ErrorCode::NonNumericCell, std::string(origin) + ": non-numeric cell '" +
                                             std::string(cell) + "' at data row " +
                                             std::to_string(row + 1) + ", column '" +
                                             col_name + "'");
    err.row = row;
    err.column = col;
    throw err;
  }
  if (!std::isfinite(value)) {
    Error err(ErrorCode::NonFiniteValue, std::string(origin) + ": non-finite cell '" +
                                             std::string(cell) + "' at data row " +
                                             std::to_string(row + 1) + ", column '" +
                                             col_name + "'");
    err.row = row;
    err.column = col;
    throw err;
  }
  return value;
}

}  // namespace

Dataset parse_csv(std::string_view text, std::string_view response, std::string_view origin) {
  const auto records = tokenize(text, origin);
  if (records.empty()) fail(ErrorCode::EmptyData, std::string(origin) + ": no header row");

  const Record& header = records.front();
  std::ptrdiff_t response_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (trim(header[j]) == response) {
      if (response_col >= 0) {
        fail(ErrorCode::DuplicateColumn,
             std::string(origin) + ": response column '" + std::string(response) +
                 "' appears more than once");
      }
      response_col = static_cast<std::ptrdiff_t>(j);
    }
  }
  if (response_col < 0) {
    fail(ErrorCode::MissingColumn,
         std::string(origin) + ": no response column '" + std::string(response) + "'");
  }
  if (records.size() < 2) fail(ErrorCode::EmptyData, std::string(origin) + ": empty data body");
  if (header.size() < 2) {
    fail(ErrorCode::InvalidDataset, std::string(origin) + ": need at least one predictor");
  }

  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) != response_col) names.emplace_back(trim(header[j]));
  }

  const auto n = static_cast<Index>(records.size() - 1);
  const auto p = static_cast<Index>(names.size());
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const Record& rec = records[static_cast<std::size_t>(i) + 1];
    if (rec.size() != header.size()) {
      Error err(ErrorCode::InvalidDataset,
                std::string(origin) + ": data row " + std::to_string(i + 1) + " has " +
                    std::to_string(rec.size()) + " fields, header has " +
                    std::to_string(header.size()));
      err.row = static_cast<std::size_t>(i);
      throw err;
    }
    Index out = 0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      const std::string col_name(trim(header[j]));
      const double v = parse_cell(rec[j], static_cast<std::size_t>(i), j, col_name, origin);
      if (static_cast<std::ptrdiff_t>(j) == response_col) {
        y(i) = v;
      } else {
        x(i, out++) = v;
      }
    }
  }
  return Dataset(std::move(x), std::move(y), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, std::string_view response) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), response, path.string());
}

SplitPair split(const Dataset& data, std::uint64_t seed) {
  const Index n = data.n();
  if (n < 4) fail(ErrorCode::DatasetTooSmall, "split needs at least 4 rows");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }

  const auto m1 = static_cast<std::size_t>((n + 1) / 2);
  std::vector<Index> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m1));
  std::vector<Index> second(perm.begin() + static_cast<std::ptrdiff_t>(m1), perm.end());
  return SplitPair{data.rows(first), data.rows(second), seed, std::move(perm)};
}

Dataset apply_standardization(const Dataset& data, const StandardizationRecord& record) {
  require(record.means.size() == data.p(), "standardization record has wrong width");
  Matrix x = data.x();
  for (Index j = 0; j < x.cols(); ++j) {
    x.col(j).array() -= record.means(j);
    if (!record.zero_variance[static_cast<std::size_t>(j)]) x.col(j) /= record.scales(j);
  }
  return Dataset(std::move(x), data.y(), data.names());
}

Dataset unstandardize(const Dataset& data, const StandardizationRecord& record) {
  require(record.means.size() == data.p(), "standardization record has wrong width");
  Matrix x = data.x();
  for (Index j = 0; j < x.cols(); ++j) {
    if (!record.zero_variance[static_cast<std::size_t>(j)]) x.col(j) *= record.scales(j);
    x.col(j).array() += record.means(j);
  }
  return Dataset(std::move(x), data.y(), data.names());
}

Standardized standardize(const Dataset& train, const Dataset& apply_to) {
  require(train.p() == apply_to.p(), "train and apply_to must have the same columns");
  const Index m = train.n();
  const Index p = train.p();

  StandardizationRecord record;
  record.means = train.x().colwise().mean().transpose();
  record.scales = Vector::Ones(p);
  record.zero_variance.assign(static_cast<std::size_t>(p), false);
  record.response_mean = train.y().mean();
  record.applied = true;

  for (Index j = 0; j < p; ++j) {
    const double mu = record.means(j);
    double sd = 0.0;
    if (m > 1) {
      sd = std::sqrt((train.x().col(j).array() - mu).square().sum() /
                     static_cast<double>(m - 1));
    }
    // Values that only differ by rounding of the mean count as constant.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
      record.zero_variance[static_cast<std::size_t>(j)] = true;
    } else {
      record.scales(j) = sd;
    }
  }

  return Standardized{apply_standardization(train, record),
                      apply_standardization(apply_to, record), std::move(record)};
}

}  // namespace agnostic
