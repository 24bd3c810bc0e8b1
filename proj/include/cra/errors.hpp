#pragma once

#include <stdexcept>
#include <string>

namespace cra {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// c*N is not an integer, so the two-sublattice sector is undefined.
struct NonIntegerFraction : Error {
    using Error::Error;
};

/// Spectrum too degenerate for the exact gauge potential.
struct DegenerateSpectrum : Error {
    using Error::Error;
};

/// Full-space oracle requested beyond its size limit.
struct DimensionTooLarge : Error {
    using Error::Error;
};

/// Step halving failed to stabilise the fidelity within the step budget.
struct NonConverged : Error {
    using Error::Error;
};

/// Fewer points than a fit requires.
struct InsufficientPoints : Error {
    using Error::Error;
};

}  // namespace cra
