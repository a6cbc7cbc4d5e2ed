#pragma once

#include "echosim/errors.hpp"
#include "echosim/units.hpp"

namespace echosim {

/// Per-atom detunings and relaxation constants.
///
/// Detunings are ordinary frequencies in kHz (converted to rad/us with 2*pi).
/// Decay constants in kHz are direct exponential rates (1 kHz -> 1e3 s^-1).
/// decay_31 is the |3> -> |1> population rate (Gamma31 in config files),
/// dephasing_31 the |1>-|3> coherence decay rate (gamma31).
struct AtomParams {
    double delta_opt_khz = 0.0;   // optical detuning of the |1>-|3> transition
    double delta_spin_khz = 0.0;  // two-photon (spin) detuning of |1>-|2>

    double decay_31_khz = 0.0;  // population |3> -> |1>
    double decay_32_khz = 0.0;  // population |3> -> |2>
    double decay_21_khz = 0.0;  // population |2> -> |1>

    double dephasing_31_khz = 0.0;  // optical coherence rho13
    double dephasing_32_khz = 0.0;  // optical coherence rho23
    double dephasing_21_khz = 0.0;  // spin coherence rho12

    double delta_opt() const { return units::rad_per_us_from_khz(delta_opt_khz); }
    double delta_spin() const { return units::rad_per_us_from_khz(delta_spin_khz); }
    double decay_31() const { return units::per_us_from_khz(decay_31_khz); }
    double decay_32() const { return units::per_us_from_khz(decay_32_khz); }
    double decay_21() const { return units::per_us_from_khz(decay_21_khz); }
    double dephasing_31() const { return units::per_us_from_khz(dephasing_31_khz); }
    double dephasing_32() const { return units::per_us_from_khz(dephasing_32_khz); }
    double dephasing_21() const { return units::per_us_from_khz(dephasing_21_khz); }

    /// Copy with the optical detuning replaced (ensemble grid override).
    AtomParams with_delta_opt_khz(double khz) const {
        AtomParams a = *this;
        a.delta_opt_khz = khz;
        return a;
    }

    /// Negative rates are errors. Coherence decay slower than the radiative
    /// lower bound is unphysical but accepted with a warning.
    Findings validate() const;
};

}  // namespace echosim
