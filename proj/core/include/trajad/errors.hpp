#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajad {

/// Argument outside the domain an operation accepts (non-finite coordinates,
/// non-positive box sizes).
class InputDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed track, label, score or config text. Carries the 1-based line
/// number of the offending row when one applies (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Weight container is truncated, malformed or does not match the expected
/// layer layout.
class WeightError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite activation during a forward pass.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prediction and window refer to different pedestrians or frames.
class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// ROC/AUC requested on labels containing a single class.
class UndefinedAucError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace trajad
