#pragma once

#include <stdexcept>

namespace gwp {

// Unreadable or unwritable files; distinct from content validation.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model fitting failed to produce a usable fit.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gwp
