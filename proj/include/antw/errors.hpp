#pragma once

#include <stdexcept>
#include <string>

namespace antw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Linear solve hit a numerically singular matrix; carries a condition estimate.
struct SingularMatrixError : Error {
    double rcond_estimate;
    SingularMatrixError(const std::string& msg, double rcond)
        : Error(msg + " (rcond ~ " + std::to_string(rcond) + ")"), rcond_estimate(rcond) {}
};

struct ConvergenceError : Error {
    using Error::Error;
};

// Feedback interconnection with a non-invertible feedthrough loop.
struct IllPosedLoopError : Error {
    using Error::Error;
};

// Time-domain integration failed; carries the last time with finite signals.
struct SimulationError : Error {
    double last_valid_time;
    SimulationError(const std::string& msg, double t)
        : Error(msg + " (last valid t = " + std::to_string(t) + ")"), last_valid_time(t) {}
};

struct AlgorithmError : Error {
    using Error::Error;
};

}  // namespace antw
