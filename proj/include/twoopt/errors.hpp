#pragma once

#include <stdexcept>
#include <string>

namespace twoopt {

// All library errors derive from one of the two std bases so callers can
// catch broadly; the CLI maps them to exit codes and refusal messages.

struct InvalidSize : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidMove : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Enumeration size guard: raised instead of starting a factorial blowup.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string cap_message(const std::string& what, std::size_t n, std::size_t cap) {
  return what + ": n = " + std::to_string(n) + " exceeds the enumeration cap of " +
         std::to_string(cap) + " (pass --i-know-this-is-huge to raise it)";
}

}  // namespace twoopt
