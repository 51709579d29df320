#include "dannasep/error.hpp"

namespace dannasep {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
        case ErrorCode::TruncatedData: return "TruncatedData";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptySignal: return "EmptySignal";
        case ErrorCode::ConfigMismatch: return "ConfigMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
        case ErrorCode::ModelCountMismatch: return "ModelCountMismatch";
        case ErrorCode::WeightModelMismatch: return "WeightModelMismatch";
        case ErrorCode::NegativeWeight: return "NegativeWeight";
        case ErrorCode::ColumnSumViolation: return "ColumnSumViolation";
        case ErrorCode::InvalidGridStep: return "InvalidGridStep";
        case ErrorCode::SingularMixCovariance: return "SingularMixCovariance";
        case ErrorCode::UnsupportedChannels: return "UnsupportedChannels";
        case ErrorCode::LengthIncompatible: return "LengthIncompatible";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::SilentReference: return "SilentReference";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MissingStem: return "MissingStem";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace dannasep
