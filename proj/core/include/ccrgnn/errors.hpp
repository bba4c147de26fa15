#pragma once

#include <stdexcept>
#include <string>

namespace ccrgnn {

// Input-side failures: unreadable files, malformed rows, values outside the
// allowed vocabulary, bad configuration. The CLI maps these to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : InputError {
    using InputError::InputError;
};

struct ValidationError : InputError {
    using InputError::InputError;
};

struct SchemaError : InputError {
    using InputError::InputError;
};

struct ConfigError : InputError {
    using InputError::InputError;
};

struct RebalanceError : InputError {
    using InputError::InputError;
};

// A caller broke an API contract (shape mismatch, non-scalar loss, ...).
// These indicate bugs, not bad data; the CLI maps them to exit code 1.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Numerical failure during optimization (NaN loss, non-finite gradient).
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace ccrgnn
