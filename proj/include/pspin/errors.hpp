#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

struct DegenerateSigma : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPureLike : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoSignChange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoAlphaFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RootNotBracketed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MemoryCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergedRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pspin
