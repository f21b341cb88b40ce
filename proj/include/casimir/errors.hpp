#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

/// Failure categories. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  validation = 1,
  numerical = 2,
  io = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::validation: return "validation";
      case ErrorKind::numerical: return "numerical";
      case ErrorKind::io: return "io";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved = 0.0)
      : Error(ErrorKind::numerical, what), achieved_(achieved) {}
  /// Best error estimate (or tolerance) reached before giving up.
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Sphere-plate contact during a sweep (d <= 0 at a set-point).
class ContactError : public Error {
 public:
  explicit ContactError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

}  // namespace casimir
