#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdtpl {

// Numeric values are part of the C ABI (see kdtpl.h); append only.
enum class ErrorCode : int {
    EmptyInput = 1,
    IndexError,
    InsufficientPoints,
    InvalidRadius,
    MissingData,
    EmptySample,
    InvalidParams,
    SingularSystem,
    DegenerateVariance,
    InsufficientCouples,
    NoConvergence,
    InvalidK,
    InvalidRho,
    SingularDesign,
    NotPositiveDefinite,
    RBUndefined,
    CellFailed,
    IoError,
    ParseError,
    InvalidArgument,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace kdtpl
