#pragma once

#include <stdexcept>
#include <string>

namespace pipeflow {

/// Base class for all pipeflow errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid physical input: non-positive density, NaN components, or an
/// argument outside a law's declared admissible range.
struct DomainError : Error {
    using Error::Error;
};

/// A solver left its validity region: no subsonic solution, sonic approach
/// during integration, bracket failure near vacuum, junction data too far
/// from stationary.
struct SolverDomainError : Error {
    using Error::Error;
};

/// A safety guard tripped: front-count cap, TV blow-up, CFL violation.
struct InstabilityError : Error {
    using Error::Error;
};

/// Malformed configuration, schema violation, or invalid geometry
/// description.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pipeflow
