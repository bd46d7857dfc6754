#pragma once

#include <stdexcept>
#include <string>

namespace tha {

/// Invalid construction parameters (grid sizes, ladders, config values).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two fields (or a field and a spec) live on different grids.
class SpecMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition does not hold (step too large, degenerate input, ...).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The periodic box is too small or too coarse for the requested scales.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace tha
