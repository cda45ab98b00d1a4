#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace matchsim {

enum class ErrorCode {
  kNonStochasticRow,
  kOutOfRange,
  kDimensionMismatch,
  kEmptyPopulation,
  kOddPopulation,
  kPlanMismatch,
  kTooLarge,
  kOddMatchedTotal,
  kSelfPair,
  kSimplexDrift,
  kNonConvergence,
  kEmptyTable,
  kInsufficientCells,
  kInvalidArgument,
  kParseError,
  kValidationError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// One violated invariant; `where` names the offending field, e.g. "b[2]" or "nu[1][2]".
struct Violation {
  ErrorCode code;
  std::string where;
  std::string detail;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace matchsim
