// constants.hpp — physical constants and power/flux conversions
#pragma once

#include <cmath>
#include <stdexcept>

namespace deltasim {

// SI defining constants (CODATA 2018, exact). Pinned so that results are
// reproducible independent of the host toolchain.
inline constexpr double planck_h = 6.62607015e-34;    // J s
inline constexpr double boltzmann_k = 1.380649e-23;   // J / K
inline constexpr char constants_version[] = "CODATA-2018";

inline constexpr double two_pi = 6.28318530717958647692528676656;

/// dBm -> W. 0 dBm is 1 mW by definition.
inline double dbm_to_watts(double p_dbm) {
    return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double p_watts) {
    if (!(p_watts > 0.0)) {
        throw std::invalid_argument("watts_to_dbm: power must be > 0");
    }
    return 10.0 * std::log10(p_watts) + 30.0;
}

/// Photon flux (photons/s) carried by a power at a given carrier frequency.
inline double input_photon_flux(double power_watts, double frequency_hz) {
    if (!(frequency_hz > 0.0)) {
        throw std::invalid_argument("input_photon_flux: frequency must be > 0 Hz");
    }
    return power_watts / (planck_h * frequency_hz);
}

} // namespace deltasim
