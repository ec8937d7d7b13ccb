#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kspde {

enum class ErrorCode {
    InvalidPotential,
    EnergyOutOfRange,
    QuadratureNotConverged,
    NoInstanton,
    NotMonotone,
    ResolutionTooLow,
    ZeroDenominator,
    OutOfRegime,
    UnsupportedRegime,
    WrongBoundaryCondition,
    DomainError,
    GridTooSmall,
    NonFinite,
    AllCensored,
    InvalidConfig,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::InvalidPotential: return "InvalidPotential";
        case ErrorCode::EnergyOutOfRange: return "EnergyOutOfRange";
        case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorCode::NoInstanton: return "NoInstanton";
        case ErrorCode::NotMonotone: return "NotMonotone";
        case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::OutOfRegime: return "OutOfRegime";
        case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
        case ErrorCode::WrongBoundaryCondition: return "WrongBoundaryCondition";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::GridTooSmall: return "GridTooSmall";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::AllCensored: return "AllCensored";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every numerical failure raised by the library carries one of the codes above,
/// so callers (the CLI in particular) can map failures without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace kspde
