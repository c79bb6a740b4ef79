#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projreg {

enum class ErrorCode {
    NotSymmetric,
    NotFinite,
    BadRank,
    BadSpec,
    BadParams,
    Singular,
    DegenerateHat,
    DegenerateLatent,
    NoResolvent,
    ZeroSpectrum,
    AtInterpolation,
    FullSpan,
    SingularGram,
    Validation,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotFinite: return "NotFinite";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::DegenerateHat: return "DegenerateHat";
    case ErrorCode::DegenerateLatent: return "DegenerateLatent";
    case ErrorCode::NoResolvent: return "NoResolvent";
    case ErrorCode::ZeroSpectrum: return "ZeroSpectrum";
    case ErrorCode::AtInterpolation: return "AtInterpolation";
    case ErrorCode::FullSpan: return "FullSpan";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace projreg
