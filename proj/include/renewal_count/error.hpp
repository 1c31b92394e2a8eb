#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace renewal_count {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An argument (time, step count, probability) is outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs that individually are fine but do not fit together
/// (mismatched vector lengths, non-nested models, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Underflow, non-convergence and other numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `position()` is the 0-based offset of the offending
/// character, or the 1-based row for tabular input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace renewal_count
