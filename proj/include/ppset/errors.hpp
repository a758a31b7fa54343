#pragma once

#include <stdexcept>
#include <string>

namespace ppset {

// Malformed input: bad JSON, missing or unknown fields, wrong field types.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that breaks a structural invariant (cycles, negative weights, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Out-of-range numeric arguments or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PruneTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Test-case executor failed for a program (distinct from the program being wrong).
class ExecutorError : public std::runtime_error {
public:
    ExecutorError(std::size_t index, const std::string& what)
        : std::runtime_error("executor failed for program " + std::to_string(index) + ": " + what),
          index_(index) {}

    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

}  // namespace ppset
