#pragma once

#include <stdexcept>
#include <string>

namespace flowtox {

/// Input data that violates a documented contract: malformed rows, ordering,
/// series too short, degenerate (constant) samples.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid answer (rank deficiency,
/// non-convergence, infeasible constraints).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter/precondition violations use std::invalid_argument.

}  // namespace flowtox
