#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impact {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCategory {
  Validation,  // bad input, bad parameters, schema or contamination problems
  Io,
  Solver,      // training or optimization failed
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ErrorCategory category = ErrorCategory::Validation)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what) : Error("invalid parameter: " + what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what) : Error("invalid state: " + what) {}
};

class MalformedEvent : public Error {
 public:
  explicit MalformedEvent(const std::string& what) : Error("malformed event: " + what) {}
};

/// Missing or unrecognized header keys / columns.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("schema error: " + what) {}
};

/// A value that cannot be accepted (non-finite, unparsable). Carries the
/// 1-based data row within its block.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row)
      : Error("data error at row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Row counts, rates or shapes that disagree with what was declared.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error("structural error: " + what) {}
};

/// Test-split data reaching a training-side operation.
class ContaminationError : public Error {
 public:
  explicit ContaminationError(const std::string& what) : Error("contamination: " + what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("i/o error: " + what, ErrorCategory::Io) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error("solver error: " + what, ErrorCategory::Solver) {}
};

}  // namespace impact
