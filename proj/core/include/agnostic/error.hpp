#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agnostic {

// Broad failure class; the command-line tool maps these to exit codes 1/2/3.
enum class ErrorKind { Data, Numerical, Usage };

enum class ErrorCode {
  // data ingestion and validation
  MissingFile,
  MissingColumn,
  DuplicateColumn,
  NonNumericCell,
  NonFiniteValue,
  EmptyData,
  InvalidDataset,
  DatasetTooSmall,
  // contract violations
  InvalidArgument,
  UnknownSelector,
  // numerical failures
  SigmaUnavailable,
  NonConvergence,
  BisectionFailure,
  InfeasibleLevel,
  EmptySelection,
  SingularDesign,
  TooFewRows,
  FitFailure,
  UnboundedInterval,
  NoFiniteInterval,
  OutOfBounds,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

  // Pipeline stage that raised the error ("split", "select", ...), if tagged.
  const std::string& stage() const noexcept { return stage_; }

  // Cell position for CSV errors (0-based data row, 0-based column).
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;

  // Returns a copy tagged with a pipeline stage; the message gains a "[stage] " prefix.
  Error with_stage(std::string stage) const;

 private:
  struct Tagged {};
  Error(Tagged, ErrorCode code, const std::string& full_message, std::string stage);

  ErrorCode code_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace agnostic
