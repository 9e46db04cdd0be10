#pragma once

#include <stdexcept>
#include <string>

namespace divlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field or function was evaluated outside its domain of definition.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs violate an operation's stated precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Unknown registry name, malformed identifier or scenario.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Failure of the flow integrator. `kind()` is MONOTONICITY_VIOLATION or STIFF_FAILURE.
class FlowError : public Error {
public:
    FlowError(std::string kind, const std::string& what) : Error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

}  // namespace divlab
