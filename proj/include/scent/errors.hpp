#pragma once

#include <stdexcept>
#include <string>

namespace scent {

// Contract violations: bad shapes, out-of-range arguments, misuse of an API.
// These indicate programming errors at the call site, not bad data.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Numeric failures: non-finite values, CFL blowup, ill-conditioned solves.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration (CLI flags, JSON files, presets).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem and serialization failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scenario could not place its observation regions within the attempt budget.
struct PlacementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scent
