#pragma once

#include <stdexcept>
#include <string>

namespace vinetrunc {

enum class ErrorKind {
    NotATree,
    ProximityViolation,
    BadIndex,
    BadDimension,
    BadTruncationLevel,
    DomainError,
    StructureMismatch,
    DimensionMismatch,
    NonConvergence,
    NumericalFailure,
    SingularInformation,
    NotNested,
    ZeroVariance,
    EmptyInput,
    EmptyCell,
    NonNumericInput,
    ParseError,
    IoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace vinetrunc
