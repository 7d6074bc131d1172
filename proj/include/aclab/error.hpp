#pragma once

#include <stdexcept>
#include <string>

namespace aclab {

// Configuration/validation failures (bad keys, malformed experiment files).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem and encoding failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace aclab
