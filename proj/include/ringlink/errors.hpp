#pragma once

#include <stdexcept>
#include <string>

namespace ringlink {

// Base class for all domain errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define RINGLINK_DEFINE_ERROR(NAME)                                     \
    struct NAME : Error {                                            \
        explicit NAME(const std::string& what) : Error(what) {}      \
    }

RINGLINK_DEFINE_ERROR(NoGuidedMode);    // fewer guided modes than requested
RINGLINK_DEFINE_ERROR(NotConverged);    // root bracketing or iterative fit failed
RINGLINK_DEFINE_ERROR(DegenerateMode);  // perturbed solves straddle a mode cutoff
RINGLINK_DEFINE_ERROR(OutOfRange);      // argument outside its documented domain
RINGLINK_DEFINE_ERROR(GridTooCoarse);   // wavelength grid undersamples a resonance
RINGLINK_DEFINE_ERROR(NoDipFound);      // spectrum has no resolvable dip
RINGLINK_DEFINE_ERROR(Unachievable);    // requested Q above the loss-limited maximum
RINGLINK_DEFINE_ERROR(OrderJump);       // resonance tracking became ambiguous
RINGLINK_DEFINE_ERROR(IllConditioned);  // stimulus span too small for a fit
RINGLINK_DEFINE_ERROR(InvalidSeed);     // all-zero LFSR state
RINGLINK_DEFINE_ERROR(GridMismatch);    // ring line too narrow for the frequency grid
RINGLINK_DEFINE_ERROR(NoSignal);        // received power below receiver range
RINGLINK_DEFINE_ERROR(ConfigError);     // configuration file parse or validation error

#undef RINGLINK_DEFINE_ERROR

}  // namespace ringlink
