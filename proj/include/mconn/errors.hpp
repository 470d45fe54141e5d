#pragma once

#include <stdexcept>
#include <string>

namespace mconn {

enum class ErrorKind {
    ZeroPolynomial,
    ZeroFunction,
    SingularMatrix,
    PoleOutsideAllowedSet,
    ZeroSection,
    InvalidConnection,
    NotASingularPoint,
    DegenerateSection,
    SingularEvaluationPoint,
    NotCyclic,
    SingularityTooClose,
    StepUnderflow,
    DegenerateJet,
    ParseError,
    ValidationFailed,
    InvalidArgument,
};

inline const char* error_kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::PoleOutsideAllowedSet: return "PoleOutsideAllowedSet";
    case ErrorKind::ZeroSection: return "ZeroSection";
    case ErrorKind::InvalidConnection: return "InvalidConnection";
    case ErrorKind::NotASingularPoint: return "NotASingularPoint";
    case ErrorKind::DegenerateSection: return "DegenerateSection";
    case ErrorKind::SingularEvaluationPoint: return "SingularEvaluationPoint";
    case ErrorKind::NotCyclic: return "NotCyclic";
    case ErrorKind::SingularityTooClose: return "SingularityTooClose";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::DegenerateJet: return "DegenerateJet";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Domain error raised by every module; `kind()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& what)
        : Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column)
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace mconn
