#pragma once

#include <stdexcept>
#include <string>

namespace framesync {

struct SyncError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Graph topology does not admit the requested solver.
struct NonQscGraph : SyncError {
    using SyncError::SyncError;
};

struct DisconnectedGraph : SyncError {
    using SyncError::SyncError;
};

// A d x d block that must be inverted is numerically singular. Signals
// input too far from a transitively consistent set.
struct SingularBlock : SyncError {
    using SyncError::SyncError;
};

// An observed edge transform is numerically singular where the method
// needs its inverse (reference-based propagation).
struct SingularEdgeMatrix : SyncError {
    using SyncError::SyncError;
};

// Iterative solver failed to reach its tolerance.
struct SolverError : SyncError {
    using SyncError::SyncError;
};

struct ConfigError : SyncError {
    using SyncError::SyncError;
};

}  // namespace framesync
