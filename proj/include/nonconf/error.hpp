#pragma once

#include <stdexcept>
#include <string>

namespace nonconf {

enum class ErrorKind {
    DegenerateDerivative,
    OriginSingularity,
    NewtonDivergence,
    OutsideRegion,
    NotContracting,
    RegionNotInvariant,
    InvalidParameter,
    BudgetExceeded,
    NoConvergence,
    NoSignChange,
    BetaNotBelowAlpha,
    DeltaUnderflow,
    DegenerateFit,
    Config,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DegenerateDerivative: return "DegenerateDerivative";
    case ErrorKind::OriginSingularity: return "OriginSingularity";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::OutsideRegion: return "OutsideRegion";
    case ErrorKind::NotContracting: return "NotContracting";
    case ErrorKind::RegionNotInvariant: return "RegionNotInvariant";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::BetaNotBelowAlpha: return "BetaNotBelowAlpha";
    case ErrorKind::DeltaUnderflow: return "DeltaUnderflow";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace nonconf
