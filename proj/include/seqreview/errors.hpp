#pragma once

#include <stdexcept>
#include <string>

namespace seqreview {

/// Invalid numeric parameter or precondition violation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mechanism triple emitted something outside its contract
/// (probability outside [0,1], a distribution not summing to one, ...).
class MechanismError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested exact computation is not available for this mechanism.
class UnsupportedMechanism : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed dataset or configuration input. Carries the 1-based line number
/// when the problem is attributable to a line (0 otherwise).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace seqreview
