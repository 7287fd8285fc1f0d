#pragma once

#include <stdexcept>
#include <string>

namespace pbm {

enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    empty_input,
    parse_error,
    io,
    unusable_patch,
    not_found,
    conflict,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception; the kind lets callers (CLI, HTTP layer) map failures
/// to exit codes or status codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pbm
