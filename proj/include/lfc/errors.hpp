#pragma once

#include <stdexcept>
#include <string>

namespace lfc {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix/vector shape mismatch.
struct DimensionError : Error {
    using Error::Error;
};

// Non-finite or otherwise malformed numeric input.
struct InputError : Error {
    using Error::Error;
};

// Physical parameter outside its admissible range.
struct ParameterError : Error {
    using Error::Error;
};

// Linear solve rejected: condition estimate exceeds the cap.
struct SingularityError : Error {
    using Error::Error;
};

// Iterative routine failed to converge within its sweep budget.
struct ConvergenceError : Error {
    using Error::Error;
};

// rank(C F) = rank(F) fails; the disturbance channel cannot be decoupled.
struct DecouplingError : Error {
    using Error::Error;
};

// Configuration file unreadable or malformed.
struct ConfigError : Error {
    using Error::Error;
};

// Artifact files disagree on dimensions or provenance.
struct IncompatibilityError : Error {
    using Error::Error;
};

// Simulation state became non-finite.
struct DivergenceError : Error {
    double blowup_time = 0.0;
    DivergenceError(const std::string& msg, double t) : Error(msg), blowup_time(t) {}
};

} // namespace lfc
