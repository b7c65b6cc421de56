#pragma once

#include <stdexcept>

namespace fc {

// A compensation formula needed to divide by a frozen reference activation
// that is zero.
struct DegenerateConstant : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The dead->active gate pattern (or a vanishing denominator) for which the
// collapsed update has no defined formula. Recorded, never silently patched.
struct UnsupportedBranch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The ActiveDead accumulation formula divides by dE/dY, which is zero.
struct ZeroErrorSingularity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Seeded resampling could not find an initialization with both reference
// activations alive.
struct DegenerateInit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fc
