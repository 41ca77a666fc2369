#pragma once

#include <stdexcept>
#include <string>

namespace nixforge {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor rank/dimension mismatches. Messages carry both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid user-supplied data (empty text, length mismatch, bad durations).
struct InputError : Error {
    using Error::Error;
};

// Invalid configuration values (odd requirements violated, bad hyperparameters).
struct ConfigError : Error {
    using Error::Error;
};

// Mathematical domain violations (non-positive sigma, divergence).
struct DomainError : Error {
    using Error::Error;
};

// Checkpoint / dump parsing failures, one kind per distinct format defect.
struct CheckpointError : Error {
    enum class Kind {
        io,
        bad_magic,
        truncated,
        duplicate_name,
        unsupported_dtype,
        missing_tensor,
        inconsistent_axes,
        invalid_value,
    };

    CheckpointError(Kind k, const std::string& msg) : Error(msg), kind(k) {}

    Kind kind;
};

} // namespace nixforge
