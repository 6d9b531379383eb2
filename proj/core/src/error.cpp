#include "confound/error.hpp"

namespace confound {

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    const std::string& stage) {
  std::string out(to_string(code));
  if (!stage.empty()) {
    out += " [";
    out += stage;
    out += "]";
  }
  if (!message.empty()) {
    out += ": ";
    out += message;
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadDimensions:
      return ErrorCategory::Usage;
    case ErrorCode::TooFewSamples:
    case ErrorCode::ParseError:
    case ErrorCode::NonNumeric:
    case ErrorCode::MissingColumn:
    case ErrorCode::ConstantColumn:
    case ErrorCode::IoError:
      return ErrorCategory::Data;
    case ErrorCode::RankDeficient:
    case ErrorCode::ZeroSignal:
    case ErrorCode::NumericOverflow:
    case ErrorCode::DegenerateModel:
    case ErrorCode::SingularMatrix:
      return ErrorCategory::Numeric;
  }
  return ErrorCategory::Numeric;
}

Error::Error(ErrorCode code, std::string message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      detail_(std::move(message)),
      stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const {
  return Error(code_, detail_, std::move(stage));
}

}  // namespace confound
