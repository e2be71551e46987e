#pragma once

#include <stdexcept>
#include <string>

namespace ymlab {

/// Bad dimensions, malformed inputs, violated preconditions.
struct InvalidArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Step size above the parabolic stability bound.
struct CflError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Energy grew past the instability tolerance during a run.
struct FlowInstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gaussian truncation ball does not fit inside one period.
struct WrapContaminationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Probe outside the admissible (z, tau, rho) domain.
struct InvalidProbeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scale ladder too short for the requested estimate.
struct LadderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config file rejected; message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Snapshot file unreadable, truncated, or not in the expected format.
struct SnapshotFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ymlab
