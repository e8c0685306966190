#pragma once

#include <stdexcept>
#include <string>

namespace gclab {

/// Machine-readable failure category. The numeric values double as CLI exit codes.
enum class ErrorCategory : int {
  kParse = 2,
  kValidation = 3,
  kFeasibility = 4,
  kNumeric = 5,
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kFeasibility: return "feasibility";
    case ErrorCategory::kNumeric: return "numeric";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCategory::kParse, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::kValidation, what) {}
};

/// Raised when a path is too short for the requested lag.
class InsufficientDataError : public ValidationError {
 public:
  explicit InsufficientDataError(const std::string& what) : ValidationError(what) {}
};

class FeasibilityError : public Error {
 public:
  explicit FeasibilityError(const std::string& what)
      : Error(ErrorCategory::kFeasibility, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::kNumeric, what) {}
};

/// A decay fit cannot be formed (too few strictly positive values).
class FitUndefinedError : public NumericError {
 public:
  explicit FitUndefinedError(const std::string& what) : NumericError(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace detail
}  // namespace gclab
