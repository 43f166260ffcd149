#pragma once

#include <stdexcept>
#include <string>

namespace hedgen {

// Malformed or inconsistent input data (bad clause grouping, empty pool, ...).
struct StructuralError : std::runtime_error {
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value (bad ratio, order < 1, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Index outside the valid range.
struct BoundsError : std::out_of_range {
    explicit BoundsError(const std::string& msg) : std::out_of_range(msg) {}
};

// File could not be read, written or parsed.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure talking to an external generation service. Transport problems
// (connection refused, timeout, 5xx) are retryable; protocol and validation
// problems are not.
struct ExternalError : std::runtime_error {
    enum class Kind { Transport, Protocol, Validation };

    ExternalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}

    bool retryable() const { return kind == Kind::Transport; }

    Kind kind;
};

}  // namespace hedgen
