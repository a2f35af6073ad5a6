#pragma once

#include <stdexcept>
#include <string>

namespace gamelab {

// Argument outside the mathematical domain of an operation (e.g. offer > 100).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A state transition would break a game invariant.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller combined arguments that the operation does not accept.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gamelab
