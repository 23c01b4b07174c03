#include "editreg/error.hpp"

#include <iostream>
#include <mutex>

namespace editreg {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::AllDepthInvalid: return "AllDepthInvalid";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::DepthSourceFailure: return "DepthSourceFailure";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::AllPointsRejected: return "AllPointsRejected";
        case ErrorCode::NoOverlap: return "NoOverlap";
        case ErrorCode::TooFewMatches: return "TooFewMatches";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::ScaleMismatch: return "ScaleMismatch";
        case ErrorCode::UnifiedScaleNonPositive: return "UnifiedScaleNonPositive";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::InvalidNoiseSpec: return "InvalidNoiseSpec";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    }
    return "Unknown";
}

namespace {

std::string compose_message(ErrorCode code, const std::string& stage, const std::string& detail) {
    std::string out = to_string(code);
    if (!stage.empty()) out += " [stage=" + stage + "]";
    out += ": " + detail;
    return out;
}

std::mutex g_warn_mutex;
WarningHandler g_handler = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose_message(code, stage, message)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(g_warn_mutex);
    WarningHandler old = std::move(g_handler);
    g_handler = std::move(handler);
    return old;
}

void warn(std::string_view message) {
    std::lock_guard lock(g_warn_mutex);
    if (g_handler) g_handler(message);
}

}  // namespace editreg
