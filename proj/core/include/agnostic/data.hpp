#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace agnostic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Design matrix plus response with column labels. Immutable once built; the
/// constructor rejects non-finite entries, duplicate or missing names, and
/// empty shapes.
class Dataset {
 public:
  Dataset(Matrix x, Vector y, std::vector<std::string> names);

  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }

  /// Column index for a label; throws MissingColumn.
  Index column(std::string_view name) const;

  /// New dataset made of the given rows, in order.
  Dataset rows(const std::vector<Index>& indices) const;

 private:
  Matrix x_;
  Vector y_;
  std::vector<std::string> names_;
};

struct SplitPair {
  Dataset d1;  // selection half, ceil(n/2) rows
  Dataset d2;  // inference half
  std::uint64_t seed;
  std::vector<Index> permutation;  // d1 = rows permutation[0..m1), d2 = the rest
};

struct StandardizationRecord {
  Vector means;
  Vector scales;                   // 1.0 where the column is zero-variance
  std::vector<bool> zero_variance;  // flagged columns are centered but not scaled
  double response_mean = 0.0;      // informational; the response is never transformed
  bool applied = false;
};

Dataset load_csv(const std::filesystem::path& path, std::string_view response);

/// Parses CSV text (header row required); `origin` names the source in errors.
Dataset parse_csv(std::string_view text, std::string_view response,
                  std::string_view origin = "<memory>");

/// Seeded random halving. d1 receives the first ceil(n/2) permuted rows.
SplitPair split(const Dataset& data, std::uint64_t seed);

struct Standardized {
  Dataset train;
  Dataset applied;
  StandardizationRecord record;
};

/// Centers and scales predictors with statistics computed from `train` only
/// (sample sd, divisor m-1), then applies the same transform to `apply_to`.
Standardized standardize(const Dataset& train, const Dataset& apply_to);

/// Applies an existing record to another dataset (same column layout).
Dataset apply_standardization(const Dataset& data, const StandardizationRecord& record);

/// Inverse of apply_standardization.
Dataset unstandardize(const Dataset& data, const StandardizationRecord& record);

}  // namespace agnostic
