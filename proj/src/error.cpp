#include "vinetrunc/error.hpp"

namespace vinetrunc {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotATree: return "NotATree";
        case ErrorKind::ProximityViolation: return "ProximityViolation";
        case ErrorKind::BadIndex: return "BadIndex";
        case ErrorKind::BadDimension: return "BadDimension";
        case ErrorKind::BadTruncationLevel: return "BadTruncationLevel";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::StructureMismatch: return "StructureMismatch";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::SingularInformation: return "SingularInformation";
        case ErrorKind::NotNested: return "NotNested";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::EmptyCell: return "EmptyCell";
        case ErrorKind::NonNumericInput: return "NonNumericInput";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace vinetrunc
