#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dannasep {

enum class ErrorCode {
    MalformedHeader,
    UnsupportedEncoding,
    TruncatedData,
    IoFailure,
    InvalidConfig,
    EmptySignal,
    ConfigMismatch,
    ShapeMismatch,
    SampleRateMismatch,
    ModelCountMismatch,
    WeightModelMismatch,
    NegativeWeight,
    ColumnSumViolation,
    InvalidGridStep,
    SingularMixCovariance,
    UnsupportedChannels,
    LengthIncompatible,
    LengthMismatch,
    SilentReference,
    RankDeficient,
    EmptyInput,
    MissingStem,
    InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every module reports failures through this type; `code()` is stable and
// machine-greppable, `what()` carries the human text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace dannasep
