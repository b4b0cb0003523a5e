#include "linereconf/error.hpp"

namespace linereconf {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Consistency: return "ConsistencyError";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::NoCapability: return "NoCapability";
    case ErrorKind::MissingTimeModel: return "MissingTimeModel";
    case ErrorKind::AmbiguousOwnership: return "AmbiguousOwnership";
    case ErrorKind::InvalidConfiguration: return "InvalidConfiguration";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::HitNodeLimit: return "HitNodeLimit";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::UnknownPair: return "UnknownPair";
    case ErrorKind::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorKind::NoFeasibleCandidate: return "NoFeasibleCandidate";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

}  // namespace linereconf
