#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linereconf {

enum class ErrorKind {
    Parse,
    Consistency,
    UnknownEntity,
    NoCapability,
    MissingTimeModel,
    AmbiguousOwnership,
    InvalidConfiguration,
    Infeasible,
    HitNodeLimit,
    NumericalFailure,
    TooLarge,
    InsufficientSamples,
    UnknownPair,
    NonPositiveDuration,
    NoFeasibleCandidate,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    // what() without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace linereconf
