#pragma once

#include <stdexcept>
#include <string>

namespace dispersim {

// Raised for malformed or physically inconsistent configuration input.
// line < 0 means the error is not tied to a specific config line.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& what, int line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what
                                       : what),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

// Raised when the integrator detects a state-invariant breach. Carries the
// simulation time at which the breach occurred.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(const std::string& what, double t_seconds)
        : std::runtime_error(what + " at t = " + std::to_string(t_seconds * 1e6) + " us"),
          time_(t_seconds) {}
    double time() const { return time_; }

  private:
    double time_;
};

// Truncation declared insufficient by the top-level occupancy guard.
class TruncationError : public IntegrationError {
  public:
    using IntegrationError::IntegrationError;
};

class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace dispersim
