#include "agnostic/error.hpp"

namespace agnostic {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateColumn: return "DuplicateColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownSelector: return "UnknownSelector";
    case ErrorCode::SigmaUnavailable: return "SigmaUnavailable";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::BisectionFailure: return "BisectionFailure";
    case ErrorCode::InfeasibleLevel: return "InfeasibleLevel";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::UnboundedInterval: return "UnboundedInterval";
    case ErrorCode::NoFiniteInterval: return "NoFiniteInterval";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::MissingColumn:
    case ErrorCode::DuplicateColumn:
    case ErrorCode::NonNumericCell:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::EmptyData:
    case ErrorCode::InvalidDataset:
    case ErrorCode::DatasetTooSmall:
      return ErrorKind::Data;
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownSelector:
      return ErrorKind::Usage;
    default:
      return ErrorKind::Numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error::Error(Tagged, ErrorCode code, const std::string& full_message, std::string stage)
    : std::runtime_error(full_message), code_(code), stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const {
  const std::string message = "[" + stage + "] " + what();
  Error tagged(Tagged{}, code_, message, std::move(stage));
  tagged.row = row;
  tagged.column = column;
  return tagged;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace agnostic
