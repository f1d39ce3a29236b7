#pragma once

#include <stdexcept>

namespace slb {

/// Thrown for malformed or out-of-domain inputs (nonpositive speeds, bad
/// files, unknown flags). The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a computed object breaks one of its structural invariants.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace slb
