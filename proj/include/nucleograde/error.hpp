#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nucleograde {

enum class ErrorCode {
    InvalidImage,
    InvalidArgument,
    SingularStainMatrix,
    EmptyRegion,
    MultipleComponents,
    OutOfBounds,
    NonFiniteField,
    DegenerateLabels,
    DimensionMismatch,
    OutOfRange,
    EmptyPopulation,
    WrongQuarterCount,
    EmptyCounts,
    UndefinedMetric,
    LengthMismatch,
    EmptyAnnotation,
    ImageTooSmall,
    MissingGroundTruth,
    ConfigError,
    ModelFormat,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidImage: return "InvalidImage";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SingularStainMatrix: return "SingularStainMatrix";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::MultipleComponents: return "MultipleComponents";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::NonFiniteField: return "NonFiniteField";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::EmptyPopulation: return "EmptyPopulation";
        case ErrorCode::WrongQuarterCount: return "WrongQuarterCount";
        case ErrorCode::EmptyCounts: return "EmptyCounts";
        case ErrorCode::UndefinedMetric: return "UndefinedMetric";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyAnnotation: return "EmptyAnnotation";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ModelFormat: return "ModelFormat";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nucleograde
