#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gramlab {

// Every failure surfaced by the library carries a short machine-readable
// code (stable across releases, used by the CLI error reporting) plus a
// human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define GRAMLAB_ERROR_CLASS(Name, CodeStr)                                   \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(CodeStr, message) {} \
    }

GRAMLAB_ERROR_CLASS(ArgError, "arg");                     // bad argument values
GRAMLAB_ERROR_CLASS(ConfigError, "config");               // malformed run configuration
GRAMLAB_ERROR_CLASS(DomainError, "domain");               // input outside supported domain
GRAMLAB_ERROR_CLASS(ShapeError, "shape");                 // dimension mismatch
GRAMLAB_ERROR_CLASS(CapacityError, "capacity");           // problem size above hard cap
GRAMLAB_ERROR_CLASS(BracketError, "bracket");             // root finder got a sign-less bracket
GRAMLAB_ERROR_CLASS(EigError, "eig");                     // eigensolver failed to converge
GRAMLAB_ERROR_CLASS(NumericalError, "numerical");         // generic numerical breakdown
GRAMLAB_ERROR_CLASS(ResolutionError, "resolution");       // quadrature cannot resolve the mode
GRAMLAB_ERROR_CLASS(PrecisionFloorError, "precision_floor"); // requested window sits below eps floor
GRAMLAB_ERROR_CLASS(StabilityError, "stability");         // explicit time step above stability limit
GRAMLAB_ERROR_CLASS(DivergenceError, "divergence");       // training loss blew up
GRAMLAB_ERROR_CLASS(UnsupportedTargetError, "unsupported_target"); // no solver for this rhs

#undef GRAMLAB_ERROR_CLASS

} // namespace gramlab
