#pragma once

#include <stdexcept>
#include <string>

namespace qiblab {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Validation, NumericPrecondition, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  // Short machine-readable identifier, e.g. "dimension_mismatch".
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string code = "validation")
      : Error(ErrorKind::Validation, std::move(code), message) {}
};

// Spectrum, kernel or domain preconditions of a numerical routine failed.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message, std::string code = "numeric_precondition")
      : Error(ErrorKind::NumericPrecondition, std::move(code), message) {}
};

class SupportError : public NumericError {
 public:
  explicit SupportError(const std::string& message) : NumericError(message, "support_violation") {}
};

class WindowError : public NumericError {
 public:
  WindowError(const std::string& message, double eigenvalue)
      : NumericError(message, "window_violation"), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::Io, "io", message) {}
};

}  // namespace qiblab
