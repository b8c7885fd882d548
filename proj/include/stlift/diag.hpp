// Source locations, spans and the error taxonomy shared by every stage.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stlift {

struct SourcePos {
    int line = 0;  // 1-based; 0 = unknown
    int col = 0;
};

struct Span {
    SourcePos begin;
    SourcePos end;

    bool known() const { return begin.line > 0; }
};

enum class ErrorCode {
    SyntaxError,
    UndeclaredIdentifier,
    UnsupportedConstruct,
    IrregularLoop,
    NonAffineSubscript,
    OutOfBounds,
    MissingInput,
    RuleMismatch,
    MissingPostcondition,
    SweepCapExceeded,
    NoStartVertex,
    NonAffineBinding,
    InconsistentOverlap,
    DivisionByZeroConstant,
    DomainTooLarge,
    ShapeMismatch,
    UnboundFreeVariable,
    UnrepresentableBranch,
    PatternMismatch,
    Internal,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndeclaredIdentifier: return "UndeclaredIdentifier";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::IrregularLoop: return "IrregularLoop";
    case ErrorCode::NonAffineSubscript: return "NonAffineSubscript";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::RuleMismatch: return "RuleMismatch";
    case ErrorCode::MissingPostcondition: return "MissingPostcondition";
    case ErrorCode::SweepCapExceeded: return "SweepCapExceeded";
    case ErrorCode::NoStartVertex: return "NoStartVertex";
    case ErrorCode::NonAffineBinding: return "NonAffineBinding";
    case ErrorCode::InconsistentOverlap: return "InconsistentOverlap";
    case ErrorCode::DivisionByZeroConstant: return "DivisionByZeroConstant";
    case ErrorCode::DomainTooLarge: return "DomainTooLarge";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnboundFreeVariable: return "UnboundFreeVariable";
    case ErrorCode::UnrepresentableBranch: return "UnrepresentableBranch";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    ErrorCode code;
    Span span;

    Error(ErrorCode c, std::string msg, Span sp = {})
        : std::runtime_error(std::string(error_code_name(c)) + ": " + msg),
          code(c), span(sp) {}
};

// "file:line:col: message" rendering for the diagnostics stream.
inline std::string format_diagnostic(const std::string& file, const Error& e) {
    std::string out = file;
    if (e.span.known()) {
        out += ":" + std::to_string(e.span.begin.line) + ":" + std::to_string(e.span.begin.col);
    }
    out += ": error: ";
    out += e.what();
    return out;
}

}  // namespace stlift
