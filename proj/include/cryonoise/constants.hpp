#pragma once

#include <cmath>

namespace cryonoise {

// Exact SI-2019 defining constants.
inline constexpr double planck_constant = 6.62607015e-34;    // J s
inline constexpr double boltzmann_constant = 1.380649e-23;   // J / K

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Temperature of half a photon at frequency f: hf/2k, the zero-bath limit
/// of the symmetrized thermal noise.
inline double half_photon_temperature(double f_hz) {
    return planck_constant * f_hz / (2.0 * boltzmann_constant);
}

} // namespace cryonoise
