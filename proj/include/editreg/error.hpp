#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace editreg {

enum class ErrorCode {
    InvalidArgument,
    InvariantViolation,
    DimensionMismatch,
    AllDepthInvalid,
    EmptyMask,
    DepthSourceFailure,
    TooFewPoints,
    EmptyCloud,
    AllPointsRejected,
    NoOverlap,
    TooFewMatches,
    DegenerateGeometry,
    ScaleMismatch,
    UnifiedScaleNonPositive,
    DegenerateInput,
    InvalidNoiseSpec,
    MissingFile,
    FormatVersionMismatch,
};

const char* to_string(ErrorCode code);

// Every failure in the library surfaces as an Error. `stage` is filled in by
// the pipeline so callers can tell which step rejected the input.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string stage = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

    Error with_stage(std::string stage) const;

private:
    ErrorCode code_;
    std::string stage_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

using WarningHandler = std::function<void(std::string_view)>;

// Non-fatal diagnostics (mask conflicts, large scale gaps). The default
// handler prints to stderr; returns the previously installed handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

// Installs a handler for the lifetime of the object and restores the old one.
class ScopedWarningHandler {
public:
    explicit ScopedWarningHandler(WarningHandler handler)
        : previous_(set_warning_handler(std::move(handler))) {}
    ~ScopedWarningHandler() { set_warning_handler(std::move(previous_)); }
    ScopedWarningHandler(const ScopedWarningHandler&) = delete;
    ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

private:
    WarningHandler previous_;
};

}  // namespace editreg
