#include "mfg/errors.hpp"

namespace mfg {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::NoDescent: return "NoDescent";
    case ErrorKind::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorKind::ContinuationStalled: return "ContinuationStalled";
    case ErrorKind::BadExponent: return "BadExponent";
    case ErrorKind::NotASolution: return "NotASolution";
    case ErrorKind::DegenerateState: return "DegenerateState";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace mfg
