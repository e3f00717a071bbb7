#pragma once

#include <stdexcept>
#include <string>

namespace ebcsl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Thrown by option_space when the layover set exceeds the enumeration cap;
// callers fall back to the sequential allocation head.
struct EnumerationCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ebcsl
