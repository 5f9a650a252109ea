#pragma once
#include <stdexcept>

namespace dcuprl {

/// Raised on shape/dimension mismatches; message names the offending axes.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a documented precondition is violated by the caller.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on bad configuration or unreadable input files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dcuprl
