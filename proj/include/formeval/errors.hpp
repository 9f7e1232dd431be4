#pragma once

#include <stdexcept>
#include <string>

namespace formeval {

/// Invalid library configuration (bad criteria file, malformed command
/// template, unknown criterion id, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation precondition (rating out of range,
/// weight vector of the wrong length, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A data file failed to load; the message names the offending line or row.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace formeval
