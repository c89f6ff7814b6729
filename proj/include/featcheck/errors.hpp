#pragma once

#include <stdexcept>
#include <string>

namespace featcheck {

/// Violated precondition of an operation (caller bug, not model data).
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Structurally invalid model data (bad distribution, malformed module, ...).
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Attempt to compose incompatible modules.
struct ComposeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Syntax or semantic error in a model file, with source position.
struct ParseError : std::runtime_error {
    int line = 0;
    int col = 0;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when the brute-force oracle refuses an oversized instance.
struct OracleRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace featcheck
