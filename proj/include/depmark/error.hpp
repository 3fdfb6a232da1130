// Exception types raised by the depmark library.
#ifndef DEPMARK_ERROR_HPP
#define DEPMARK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace depmark {

/// Base class for all depmark errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or input is outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnknownParameter : public DomainError {
 public:
  explicit UnknownParameter(std::string name)
      : DomainError("unknown parameter '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A transition rate evaluated below zero, e.g. `1 - C` with C > 1.
class NegativeRate : public DomainError {
 public:
  explicit NegativeRate(double value)
      : DomainError("transition rate evaluates to negative value " +
                    std::to_string(value)),
        value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class LengthMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class TimeMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The paper-literal solver only accepts the 7-state feed-water shape.
class ShapeMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Raised by solvers that cannot produce a result to the requested accuracy.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Euler step violates dt * max|Q_ii| < 1.
class StepTooLarge : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

}  // namespace depmark

#endif  // DEPMARK_ERROR_HPP
