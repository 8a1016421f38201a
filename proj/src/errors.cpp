#include "charfront/errors.hpp"

namespace charfront {

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonHyperbolic: return "NonHyperbolic";
        case ErrorCode::UnknownModel: return "UnknownModel";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::NoBlowup: return "NoBlowup";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::NotInvertible: return "NotInvertible";
        case ErrorCode::BracketViolation: return "BracketViolation";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::InnerDiverged: return "InnerDiverged";
        case ErrorCode::EnvelopeViolation: return "EnvelopeViolation";
        case ErrorCode::OuterDiverged: return "OuterDiverged";
        case ErrorCode::BootstrapViolation: return "BootstrapViolation";
        case ErrorCode::BoxExit: return "BoxExit";
        case ErrorCode::NoShock: return "NoShock";
        case ErrorCode::InsufficientSpan: return "InsufficientSpan";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace charfront
