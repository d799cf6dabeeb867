#pragma once

#include <stdexcept>
#include <string>

namespace qsg {

// Base class for all library errors so callers can catch qsg failures in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error { using Error::Error; };    // inconsistent instance/strategy data
struct ParseError : Error { using Error::Error; };         // malformed input file
struct SizeError : Error { using Error::Error; };          // instance too large for the method
struct ConfigError : Error { using Error::Error; };        // missing solver command etc.
struct TimeoutError : Error { using Error::Error; };       // external solver exceeded its deadline
struct SolverOutputError : Error { using Error::Error; };  // external solution violates the model
struct InfeasibleError : Error { using Error::Error; };    // model reported infeasible

// Signals that y = exp(-lambda * w_att * x) is constant (lambda * w_att == 0),
// so the transform cannot be inverted. Callers are expected to branch on
// transform_degenerate() instead of calling through the transform.
struct DegenerateTransformError : Error { using Error::Error; };

} // namespace qsg
