#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace turmoil {

enum class ErrorCode {
    InvalidArgument,
    FileNotFound,
    MalformedCsv,
    NoValidRows,
    DuplicateDate,
    TooFewObservations,
    EmptyIntersection,
    SingularMatrix,
    DegenerateComponent,
    NonFiniteValue,
    MisalignedSeries,
    Unsupported,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::FileNotFound: return "file-not-found";
        case ErrorCode::MalformedCsv: return "malformed-csv";
        case ErrorCode::NoValidRows: return "no-valid-rows";
        case ErrorCode::DuplicateDate: return "duplicate-date";
        case ErrorCode::TooFewObservations: return "too-few-observations";
        case ErrorCode::EmptyIntersection: return "empty-intersection";
        case ErrorCode::SingularMatrix: return "singular-matrix";
        case ErrorCode::DegenerateComponent: return "degenerate-component";
        case ErrorCode::NonFiniteValue: return "non-finite-value";
        case ErrorCode::MisalignedSeries: return "misaligned-series";
        case ErrorCode::Unsupported: return "unsupported";
    }
    return "unknown";
}

/// Library-wide exception. Every failure the library reports carries a code
/// so callers (the CLI in particular) can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a recursion produces a non-finite value; `index` is the
/// offending observation.
class NonFiniteError : public Error {
public:
    NonFiniteError(std::size_t index, const std::string& what)
        : Error(ErrorCode::NonFiniteValue, what + " at t=" + std::to_string(index)),
          index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace turmoil
