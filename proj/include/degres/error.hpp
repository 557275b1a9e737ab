#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degres {

enum class ErrorCode {
    InvalidArgument,
    NoConvergence,
    SingularJacobian,
    MissingSaddle,
    OnCurve,
    TangentialCrossing,
    Inconsistent,
    StepUnderflow,
    Blowup,
    SingularDenominator,
    NonrealMultipliers,
    NonFinite,
    OrderTooHigh,
    IdentityViolated,
    Precondition,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::SingularJacobian: return "SINGULAR_JACOBIAN";
    case ErrorCode::MissingSaddle: return "MISSING_SADDLE";
    case ErrorCode::OnCurve: return "ON_CURVE";
    case ErrorCode::TangentialCrossing: return "TANGENTIAL_CROSSING";
    case ErrorCode::Inconsistent: return "INCONSISTENT";
    case ErrorCode::StepUnderflow: return "STEP_UNDERFLOW";
    case ErrorCode::Blowup: return "BLOWUP";
    case ErrorCode::SingularDenominator: return "SINGULAR_DENOMINATOR";
    case ErrorCode::NonrealMultipliers: return "NONREAL_MULTIPLIERS";
    case ErrorCode::NonFinite: return "NON_FINITE";
    case ErrorCode::OrderTooHigh: return "ORDER_TOO_HIGH";
    case ErrorCode::IdentityViolated: return "IDENTITY_VIOLATED";
    case ErrorCode::Precondition: return "PRECONDITION";
    }
    return "UNKNOWN";
}

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace degres
