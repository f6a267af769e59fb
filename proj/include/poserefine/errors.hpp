#pragma once

#include <stdexcept>
#include <string>

namespace poserefine {

/// Numeric degeneracy (near-zero norms, non-finite activations).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss or gradients during optimization.
struct TrainingDivergence : std::runtime_error {
    explicit TrainingDivergence(const std::string& what)
        : std::runtime_error(what) {}
};

/// Unusable dataset content (missing files, malformed records).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poserefine
