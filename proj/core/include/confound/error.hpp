#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace confound {

enum class ErrorCode {
  InvalidArgument,
  TooFewSamples,
  RankDeficient,
  ZeroSignal,
  NumericOverflow,
  BadDimensions,
  DegenerateModel,
  SingularMatrix,
  ParseError,
  NonNumeric,
  MissingColumn,
  ConstantColumn,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { Usage, Data, Numeric };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  // Pipeline stage that raised the error, empty when not inside a pipeline.
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace confound
