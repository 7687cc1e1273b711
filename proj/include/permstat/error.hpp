#pragma once

#include <stdexcept>
#include <string>

namespace permstat {

enum class ErrorCode {
    AlphaOutOfRange,
    PermCountTooLow,
    BootCountTooLow,
    DimensionTooSmall,
    ShapeMismatch,
    ZeroVariance,
    SigmaNonPositive,
    TailUnsupported,
    Unbalanced,
    SampleTooSmall,
    SEUnavailable,
    DomainError,
    TooLargeToEnumerate,
    BootstrapDegenerate,
    ParseError,
    NonFiniteValue,
    EmptyTable,
    IoError,
    BadArgument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

    // Validation errors map to CLI exit 2, data/runtime errors to exit 3.
    bool is_validation() const noexcept {
        switch (code_) {
            case ErrorCode::AlphaOutOfRange:
            case ErrorCode::PermCountTooLow:
            case ErrorCode::BootCountTooLow:
            case ErrorCode::TailUnsupported:
            case ErrorCode::BadArgument:
                return true;
            default:
                return false;
        }
    }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace permstat
