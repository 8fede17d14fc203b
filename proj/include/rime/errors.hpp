#pragma once

#include <stdexcept>
#include <string>

namespace rime {

// Vector lengths disagree with the model or graph dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An update or call is not well formed against the current state.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Internal contract between modules was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Instance is too large for an exhaustive routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Operation not permitted in the configured update mode.
class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rime
