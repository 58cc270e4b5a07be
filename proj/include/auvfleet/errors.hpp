#pragma once

#include <stdexcept>
#include <string>

namespace auvfleet {

/// Euler kinematics degenerate: |cos(pitch)| at or below the configured margin.
class SingularPoseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, parameter file, or scenario description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix sizes inconsistent between caller and callee.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A follower was stepped without ever receiving a leader message.
class MissingMessageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace auvfleet
