#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

// Domain errors that carry meaning for callers (the CLI maps them to exit code 2).

// E(y,s) <= 0: the profile's numerator left its validity region (delta or s too small).
struct NonpositiveE : std::runtime_error {
    explicit NonpositiveE(const std::string& what) : std::runtime_error(what) {}
};

// The bracket inside the initial data w0 is <= 0 (s0 below the admissible threshold).
struct NonpositiveBracket : std::runtime_error {
    explicit NonpositiveBracket(const std::string& what) : std::runtime_error(what) {}
};

// u*(a) requested at a = 0, where the final profile diverges.
struct DivergesAtOrigin : std::runtime_error {
    explicit DivergesAtOrigin(const std::string& what) : std::runtime_error(what) {}
};

// Re-centering asked for samples outside the representable hull.
struct OutOfHull : std::runtime_error {
    explicit OutOfHull(const std::string& what) : std::runtime_error(what) {}
};

// Time integration left the trusted regime (sup|w| > 10*kappa).
struct IntegrationOverflow : std::runtime_error {
    explicit IntegrationOverflow(const std::string& what) : std::runtime_error(what) {}
};

// A scenario check needed a trajectory that stays in the membership region,
// but the evolution exited before reaching the requested time.
struct MissingTrajectory : std::runtime_error {
    explicit MissingTrajectory(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blowup
