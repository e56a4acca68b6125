#pragma once

#include <stdexcept>
#include <string>

namespace stopt {

/// A numeric solve failed (bracket inconsistency, Newton divergence,
/// cross-check residual above tolerance).
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Sign conditions contradict the case classification.
struct BracketError : SolverError {
    explicit BracketError(const std::string& what) : SolverError(what) {}
};

/// The two-sided entry boundary could not be located from any initial guess.
struct NoInteriorSolutionError : SolverError {
    explicit NoInteriorSolutionError(const std::string& what) : SolverError(what) {}
};

}  // namespace stopt
