// errors.hpp -- exception taxonomy shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace feclab {

// Bad configuration or out-of-contract arguments detected up front.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed bytes on the wire (truncated frame, unknown type byte, ...).
struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal consistency violated (e.g. contradictory linear system).  On an
// erasure channel this can only mean a bug, so it is never swallowed.
struct IntegrityError : std::logic_error {
    using std::logic_error::logic_error;
};

// Sliding-window encoder asked to grow past its configured bound.
struct WindowOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metrics requested on an empty or truncated trace.
struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace feclab
