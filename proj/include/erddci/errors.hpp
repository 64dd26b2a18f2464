// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace erddci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid tensor extents (zero, overflowing, or mismatched).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A numeric argument or configuration value is outside its domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Editing / guidance configuration violates its invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A formula hit a singular point (division by zero noise level etc.).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Cached state is inconsistent with what an operation expects.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Training diverged.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A failure inside a chain runner, tagged with the plan step it hit.
class StepError : public Error {
public:
    StepError(int step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Raised while decoding a tensor file.
class ParseError : public Error {
public:
    enum class Kind { io, bad_magic, bad_version, unknown_dtype, truncated, bad_shape, non_finite };

    ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace erddci
