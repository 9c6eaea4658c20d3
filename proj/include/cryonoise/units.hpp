#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "cryonoise/constants.hpp"

namespace cryonoise {

namespace detail {
inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}
} // namespace detail

/// Strictly positive frequency in hertz.
class Frequency {
public:
    explicit Frequency(double hertz) : hz_(hertz) {
        detail::require_finite(hertz, "frequency");
        if (hertz <= 0.0) throw std::invalid_argument("frequency must be > 0 Hz");
    }
    static Frequency from_ghz(double ghz) { return Frequency(ghz * 1e9); }
    double hertz() const { return hz_; }
    double ghz() const { return hz_ * 1e-9; }

private:
    double hz_;
};

/// Non-negative noise temperature in kelvin. Signed derived quantities
/// (intrinsic amplifier noise, photon numbers) are carried as plain doubles.
class NoiseTemperature {
public:
    explicit NoiseTemperature(double kelvin) : k_(kelvin) {
        detail::require_finite(kelvin, "noise temperature");
        if (kelvin < 0.0) throw std::invalid_argument("noise temperature must be >= 0 K");
    }
    double kelvin() const { return k_; }

private:
    double k_;
};

/// Dimensionless power gain (or loss, when < 1), strictly positive.
class LinearGain {
public:
    explicit LinearGain(double ratio) : ratio_(ratio) {
        detail::require_finite(ratio, "gain");
        if (ratio <= 0.0) throw std::invalid_argument("linear gain must be > 0");
    }
    static LinearGain from_db(double db) { return LinearGain(db_to_linear(db)); }
    double ratio() const { return ratio_; }
    double db() const { return linear_to_db(ratio_); }

private:
    double ratio_;
};

} // namespace cryonoise
