#pragma once

#include <stdexcept>
#include <string>

namespace charfront {

enum class ErrorCode {
    NonHyperbolic,
    UnknownModel,
    BadParams,
    NoBlowup,
    Degenerate,
    NotInvertible,
    BracketViolation,
    NoRoot,
    NewtonDiverged,
    InnerDiverged,
    EnvelopeViolation,
    OuterDiverged,
    BootstrapViolation,
    BoxExit,
    NoShock,
    InsufficientSpan,
    ConfigError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace charfront
