#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cryonoise/constants.hpp"
#include "cryonoise/units.hpp"

namespace cryonoise::noise {

/// Per-frequency gain table in dB, used for the optional preamplifier gains
/// of an amplification chain. Lookup requires an exact grid point.
struct GainTable {
    std::vector<double> f_hz;
    std::vector<double> db;

    void validate() const {
        if (f_hz.size() != db.size()) {
            throw std::invalid_argument("gain table: frequency and gain lists differ in length");
        }
        if (f_hz.empty()) throw std::invalid_argument("gain table: empty");
        for (std::size_t i = 1; i < f_hz.size(); ++i) {
            if (f_hz[i] <= f_hz[i - 1]) {
                throw std::invalid_argument("gain table: frequency grid must be strictly increasing");
            }
        }
    }

    bool same_grid(const GainTable& other) const { return f_hz == other.f_hz; }

    double db_at(double f) const {
        for (std::size_t i = 0; i < f_hz.size(); ++i) {
            if (std::abs(f_hz[i] - f) <= 1e-6 * std::max(1.0, std::abs(f))) return db[i];
        }
        throw std::invalid_argument("gain table: frequency not on grid");
    }
};

/// Lumped description of the amplification chain: second-stage amplifier,
/// background of the warm electronics, optional preamplifier gains and the
/// insertion-loss correction element.
struct ChainConfig {
    double g_hemt = 1e4;                     // linear power gain of the second stage
    double t_hemt_k = 0.0;
    double t_bkg_k = 0.0;
    std::optional<double> t_twpa_k;          // preamplifier intrinsic noise
    std::optional<GainTable> twpa_gain_db;   // per-frequency preamp gain
    std::optional<GainTable> conv_gain_db;   // per-frequency idler conversion gain
    double g_att = 1.0;                      // insertion-loss correction factor, <= 1
    double t_att_k = 0.0;                    // temperature of the lossy element
    double bandwidth_hz = 100.0;

    void validate() const {
        if (!(g_hemt > 0.0)) throw std::invalid_argument("chain: g_hemt must be > 0");
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("chain: bandwidth must be > 0");
        if (t_hemt_k < 0.0 || t_bkg_k < 0.0 || t_att_k < 0.0) {
            throw std::invalid_argument("chain: noise temperatures must be >= 0");
        }
        if (!(g_att > 0.0) || g_att > 1.0) {
            throw std::invalid_argument("chain: g_att must be in (0, 1]");
        }
        if (twpa_gain_db.has_value() != conv_gain_db.has_value()) {
            throw std::invalid_argument("chain: preamp gain requires conversion gain on the same grid");
        }
        if (twpa_gain_db) {
            twpa_gain_db->validate();
            conv_gain_db->validate();
            if (!twpa_gain_db->same_grid(*conv_gain_db)) {
                throw std::invalid_argument("chain: preamp and conversion gain grids differ");
            }
        }
    }
};

/// Thermal noise temperature emitted by a matched source at bath temperature
/// t_bath, seen at frequency f:  (hf/2k) coth(hf/2kT).  At T = 0 this is the
/// analytic vacuum limit hf/2k.
inline double planck_input_noise_k(double f_hz, double t_bath_k) {
    if (!std::isfinite(f_hz) || !std::isfinite(t_bath_k)) {
        throw std::invalid_argument("planck_input_noise: non-finite input");
    }
    if (f_hz <= 0.0) throw std::invalid_argument("planck_input_noise: frequency must be > 0");
    if (t_bath_k < 0.0) throw std::invalid_argument("planck_input_noise: bath temperature must be >= 0");
    const double a = half_photon_temperature(f_hz);
    if (t_bath_k == 0.0) return a;
    // a/tanh saturates cleanly for large arguments; no overflow path.
    return a / std::tanh(a / t_bath_k);
}

inline NoiseTemperature planck_input_noise(Frequency f, NoiseTemperature t_bath) {
    return NoiseTemperature(planck_input_noise_k(f.hertz(), t_bath.kelvin()));
}

/// d(T_in)/d(T_bath) of the expression above: (x/sinh x)^2 with x = hf/2kT.
/// Used to propagate thermometer error through the quantum correction.
inline double planck_input_noise_slope(double f_hz, double t_bath_k) {
    if (f_hz <= 0.0) throw std::invalid_argument("planck_input_noise_slope: frequency must be > 0");
    if (t_bath_k < 0.0) throw std::invalid_argument("planck_input_noise_slope: bath temperature must be >= 0");
    if (t_bath_k == 0.0) return 0.0;
    const double x = half_photon_temperature(f_hz) / t_bath_k;
    if (x > 350.0) return 0.0;  // sinh would overflow; slope is < 1e-300 there
    const double r = x / std::sinh(x);
    return r * r;
}

/// Idler frequency of the four-wave mixing process: 2 f_pump - f_signal.
inline Frequency idler_frequency(Frequency f_pump, Frequency f_signal) {
    const double fi = 2.0 * f_pump.hertz() - f_signal.hertz();
    if (fi <= 0.0) {
        throw std::invalid_argument("idler_frequency: 2*f_pump must exceed f_signal");
    }
    return Frequency(fi);
}

/// Effective input noise of a four-wave-mixing preamplifier: the signal-band
/// thermal noise plus the idler-band noise converted back to the input,
/// weighted by conversion-to-signal gain ratio.
inline double effective_input_noise_k(double f_signal_hz, double f_pump_hz, double t_bath_k,
                                      double conv_to_signal_ratio) {
    if (conv_to_signal_ratio < 0.0) {
        throw std::invalid_argument("effective_input_noise: gain ratio must be >= 0");
    }
    const Frequency fi = idler_frequency(Frequency(f_pump_hz), Frequency(f_signal_hz));
    return planck_input_noise_k(f_signal_hz, t_bath_k) +
           conv_to_signal_ratio * planck_input_noise_k(fi.hertz(), t_bath_k);
}

inline NoiseTemperature effective_input_noise(Frequency f_signal, Frequency f_pump,
                                              NoiseTemperature t_bath, LinearGain g_twpa,
                                              LinearGain g_conv) {
    return NoiseTemperature(effective_input_noise_k(f_signal.hertz(), f_pump.hertz(),
                                                    t_bath.kelvin(),
                                                    g_conv.ratio() / g_twpa.ratio()));
}

/// Forward model of the integrated output power for the path without a
/// preamplifier:  G_tot k B (T_in + T_hemt + T_bkg / G_hemt).
inline double expected_output_power_thru(const ChainConfig& chain, NoiseTemperature t_in,
                                         LinearGain g_tot) {
    chain.validate();
    const double t_sys = t_in.kelvin() + chain.t_hemt_k + chain.t_bkg_k / chain.g_hemt;
    return g_tot.ratio() * boltzmann_constant * chain.bandwidth_hz * t_sys;
}

/// Forward system noise for the preamplified path:
/// T_bkg/(G_hemt G_twpa) + T_hemt/G_twpa + T_twpa + T_in_eff.
inline double system_noise_twpa_forward_k(const ChainConfig& chain, double f_signal_hz,
                                          double t_in_eff_k) {
    chain.validate();
    if (!chain.twpa_gain_db || !chain.t_twpa_k) {
        throw std::invalid_argument("system_noise_twpa_forward: chain lacks preamp gain or noise");
    }
    const double g_twpa = db_to_linear(chain.twpa_gain_db->db_at(f_signal_hz));
    return chain.t_bkg_k / (chain.g_hemt * g_twpa) + chain.t_hemt_k / g_twpa +
           *chain.t_twpa_k + t_in_eff_k;
}

/// Intrinsic preamplifier noise from the two measured system noises.
/// May be negative due to measurement scatter; the sign is preserved.
inline double twpa_intrinsic_noise(NoiseTemperature t_sys_twpa, NoiseTemperature t_sys_hemt,
                                   LinearGain g_twpa) {
    return t_sys_twpa.kelvin() - t_sys_hemt.kelvin() / g_twpa.ratio();
}

/// Noise temperature expressed in photons at frequency f: k T / (h f).
inline double photons_from_temperature(double t_signed_k, Frequency f) {
    return boltzmann_constant * t_signed_k / (planck_constant * f.hertz());
}

/// One-photon system-noise quantum limit: hf/k (half-photon minimum added
/// noise plus half-photon vacuum input).
inline NoiseTemperature standard_quantum_limit(Frequency f) {
    return NoiseTemperature(planck_constant * f.hertz() / boltzmann_constant);
}

struct PhotonSample {
    double n = 0.0;
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
};

struct PhotonAverage {
    double n = 0.0;
    double err_lo = 0.0;
    double err_hi = 0.0;
};

/// Inverse-variance weighted mean of photon numbers. Weights use the
/// symmetrized sigma (lo+hi)/2; the asymmetric errors propagate side-wise.
inline PhotonAverage weighted_average_photons(std::span<const PhotonSample> points) {
    if (points.empty()) throw std::invalid_argument("weighted_average_photons: empty input");
    double sw = 0.0, swn = 0.0, slo = 0.0, shi = 0.0;
    for (const auto& p : points) {
        if (!(p.sigma_lo > 0.0) || !(p.sigma_hi > 0.0)) {
            throw std::invalid_argument("weighted_average_photons: sigmas must be > 0");
        }
        const double s = 0.5 * (p.sigma_lo + p.sigma_hi);
        const double w = 1.0 / (s * s);
        sw += w;
        swn += w * p.n;
        slo += w * w * p.sigma_lo * p.sigma_lo;
        shi += w * w * p.sigma_hi * p.sigma_hi;
    }
    return {swn / sw, std::sqrt(slo) / sw, std::sqrt(shi) / sw};
}

} // namespace cryonoise::noise
