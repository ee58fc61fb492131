#pragma once

#include <stdexcept>
#include <string>

namespace hyperlat {

/// Thrown when an algorithm would exceed a configured resource budget
/// (e.g. the tiling generator's vertex cap) before completing.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a computation fails numerically (singular system,
/// eigensolver failure, violated numerical invariant).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hyperlat
