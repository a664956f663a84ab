#include "kdtpl/error.hpp"

namespace kdtpl {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InsufficientCouples: return "InsufficientCouples";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RBUndefined: return "RBUndefined";
    case ErrorCode::CellFailed: return "CellFailed";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace kdtpl
