#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace llmroi {

/// Base of every error thrown by the engine. `code()` is a short stable
/// identifier suitable for machine consumption (HTTP envelopes, exit codes).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Input violates a type invariant or a schema rule. `field()` names the
/// offending field (a dotted path when it comes from a document).
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error("validation_error", field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        reason_(message) {}

  const std::string& field() const noexcept { return field_; }
  /// The message without the field prefix.
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

/// Text could not be parsed at all.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("parse_error", "line " + std::to_string(line) + ", column " +
                                 std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

/// Inputs are valid but the requested quantity does not exist
/// (no break-even root, undefined RoI, constant Sobol model, ...).
class DomainError : public Error {
 public:
  DomainError(std::string code, const std::string& message,
              std::optional<double> value = std::nullopt,
              std::vector<double> context = {})
      : Error(std::move(code), message), value_(value), context_(std::move(context)) {}

  /// Raw value involved in the failure, e.g. the out-of-domain root.
  std::optional<double> value() const noexcept { return value_; }
  /// Extra coordinates, e.g. the sample row that produced a non-finite output.
  const std::vector<double>& context() const noexcept { return context_; }

 private:
  std::optional<double> value_;
  std::vector<double> context_;
};

namespace error_code {
inline constexpr const char* kNoSolution = "no_solution";
inline constexpr const char* kOutOfDomain = "out_of_domain";
inline constexpr const char* kRoiUndefined = "roi_undefined";
inline constexpr const char* kSingular = "singular";
inline constexpr const char* kDegenerateModel = "degenerate_model";
inline constexpr const char* kNonFinite = "non_finite";
}  // namespace error_code

}  // namespace llmroi
