// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace orchsim {

// Invalid run configuration, policy parameters, or trace content.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A verification sweep found a violated guarantee. CLI exit code 3.
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem or parse failure. CLI exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance exceeds the caps of an exhaustive oracle.
struct SizeCapError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace orchsim
