#pragma once

#include <stdexcept>
#include <string>

namespace bulkq {

// Base for all solver errors so callers can map them to exit codes.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model validation
struct GeneratorRowSumError : SolverError { using SolverError::SolverError; };
struct SignPatternError : SolverError { using SolverError::SolverError; };
struct ReducibleError : SolverError { using SolverError::SolverError; };
struct SingularSolveError : SolverError { using SolverError::SolverError; };

// Service laws
struct InvalidSubGenerator : SolverError { using SolverError::SolverError; };
struct DegenerateApproximant : SolverError { using SolverError::SolverError; };
struct PoleEvaluation : SolverError { using SolverError::SolverError; };

// Kernel / characteristic polynomial
struct SingularDenominator : SolverError { using SolverError::SolverError; };
struct TruncationError : SolverError { using SolverError::SolverError; };
struct DegreeMismatch : SolverError { using SolverError::SolverError; };
struct RootCountError : SolverError { using SolverError::SolverError; };

// Stationary solve / extraction
struct NullSpaceDimensionError : SolverError { using SolverError::SolverError; };
struct NegativeSolutionError : SolverError { using SolverError::SolverError; };
struct ResidueInstability : SolverError { using SolverError::SolverError; };
struct NegativeProbabilityError : SolverError { using SolverError::SolverError; };

// Stability
struct UnstableSystemError : SolverError { using SolverError::SolverError; };

}  // namespace bulkq
