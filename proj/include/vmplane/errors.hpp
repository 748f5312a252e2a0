#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace vmp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept { return "error"; }
};

// Malformed input or a violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "input_error"; }
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
  const char* code() const noexcept override { return "domain_error"; }
};

class NotVonMangoldt : public InputError {
 public:
  using InputError::InputError;
  const char* code() const noexcept override { return "not_von_mangoldt"; }
};

// m hit zero inside the window: the spec does not define a complete plane.
class StarViolation : public Error {
 public:
  explicit StarViolation(double first_zero)
      : Error("m vanishes at r = " + std::to_string(first_zero)),
        first_zero_(first_zero) {}
  double first_zero() const noexcept { return first_zero_; }
  const char* code() const noexcept override { return "star_violation"; }

 private:
  double first_zero_;
};

class WindowLimited : public Error {
 public:
  WindowLimited(const std::string& what, double indicator)
      : Error(what), indicator_(indicator) {}
  double indicator() const noexcept { return indicator_; }
  const char* code() const noexcept override { return "window_limited"; }

 private:
  double indicator_;
};

// A decision fell inside the error band of its threshold.
class Undetermined : public Error {
 public:
  Undetermined(const std::string& what, double value, double abs_error)
      : Error(what), value_(value), abs_error_(abs_error) {}
  double value() const noexcept { return value_; }
  double abs_error() const noexcept { return abs_error_; }
  const char* code() const noexcept override { return "undetermined"; }

 private:
  double value_;
  double abs_error_;
};

class ConstructionError : public Error {
 public:
  ConstructionError(const std::string& what,
                    double lo = std::numeric_limits<double>::quiet_NaN(),
                    double hi = std::numeric_limits<double>::quiet_NaN())
      : Error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }
  const char* code() const noexcept override { return "construction_failed"; }

 private:
  double lo_;
  double hi_;
};

}  // namespace vmp
