#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfg {

enum class ErrorKind {
    InvalidArgument,
    InvalidConfig,
    NonPositiveDensity,
    LinearSolveFailure,
    NoDescent,
    MaxItersExceeded,
    ContinuationStalled,
    BadExponent,
    NotASolution,
    DegenerateState,
    NotPositive,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the
/// continuation driver, the CLI exit-code mapping) can react without parsing
/// messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace mfg
