#pragma once

#include <stdexcept>
#include <string>

namespace pelastic {

enum class ErrorKind {
    DegenerateCurve,
    NonMonotoneProfile,
    GridMismatch,
    NotConstantSpeed,
    InvalidParameter,
    IndexOutOfRange,
    Io,
    Parse,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pelastic
