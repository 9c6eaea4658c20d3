#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cryonoise/noise.hpp"
#include "cryonoise/ode.hpp"
#include "cryonoise/units.hpp"

namespace cryonoise::twpa {

using complexd = std::complex<double>;

/// Junction transmission-line device parameters. The line is modeled as
/// n_cells * junctions_per_cell identical sections; each section carries the
/// per-cell wavenumber for linear propagation (phase, delay, attenuation),
/// while the parametric coefficients are per cell, spread uniformly over its
/// junctions. loss_participation scales the dielectric attenuation of signal
/// and idler; the pump propagates lossless.
struct TwpaParams {
    double i_c = 4.4e-6;                        // A
    double omega_j = 2.0 * std::numbers::pi * 46.5e9;  // rad/s
    int n_cells = 1016;
    int junctions_per_cell = 4;
    double l_cell = 312e-12;                    // H
    double c_cell = 115e-15;                    // F
    double tan_delta = 0.0025;
    double i_p_ratio = 0.45;                    // I_p / I_c
    double r_mirror = 0.15;
    double loss_participation = 1.0;

    int total_junctions() const { return n_cells * junctions_per_cell; }
    double t_mirror() const { return std::sqrt(1.0 - r_mirror * r_mirror); }

    /// LC-ladder cut-off 2/sqrt(LC) of one section.
    double lc_cutoff() const { return 2.0 / std::sqrt(l_cell * c_cell); }

    void validate() const {
        if (!(i_c > 0.0)) throw std::invalid_argument("twpa: i_c must be > 0");
        if (!(omega_j > 0.0)) throw std::invalid_argument("twpa: omega_j must be > 0");
        if (n_cells < 1 || junctions_per_cell < 1) {
            throw std::invalid_argument("twpa: cell counts must be >= 1");
        }
        if (!(l_cell > 0.0) || !(c_cell > 0.0)) throw std::invalid_argument("twpa: L, C must be > 0");
        if (tan_delta < 0.0) throw std::invalid_argument("twpa: tan_delta must be >= 0");
        if (i_p_ratio < 0.0 || i_p_ratio >= 1.0) {
            throw std::invalid_argument("twpa: i_p_ratio must be in [0, 1)");
        }
        if (r_mirror < 0.0 || r_mirror >= 1.0) {
            throw std::invalid_argument("twpa: r_mirror must be in [0, 1)");
        }
        if (!(loss_participation > 0.0) || loss_participation > 1.0) {
            throw std::invalid_argument("twpa: loss_participation must be in (0, 1]");
        }
    }

    /// Measured-device calibration: pump ratio and loss participation chosen
    /// to reproduce the reference gain band and the 4.5 dB unpumped loss at
    /// 8 GHz with the tabulated L, C, plasma frequency and mirrors.
    static TwpaParams device_default() {
        TwpaParams p;
        p.i_p_ratio = 0.45;
        p.loss_participation = 0.3337;
        return p;
    }
};

struct PumpSetting {
    double f_pump_hz = 5.968e9;
    std::optional<double> i_p_ratio;  // overrides TwpaParams when set

    double ratio_or(const TwpaParams& params) const {
        return i_p_ratio.value_or(params.i_p_ratio);
    }
};

struct TransmissionPoint {
    double f_signal_hz = 0.0;
    complexd s_on;    // pumped transmission
    complexd s_off;   // unpumped transmission
    complexd g_conv;  // idler output per unit signal input
};

/// Per-cell wavenumber of the junction-loaded line,
/// k = omega sqrt(LC) / sqrt(1 - (omega/omega_J)^2), with the dielectric
/// attenuation of signal/idler as the imaginary part.
inline complexd dispersion_k(const TwpaParams& params, Frequency f) {
    params.validate();
    const double w = 2.0 * std::numbers::pi * f.hertz();
    if (w >= params.omega_j) {
        throw std::invalid_argument("dispersion_k: frequency at or above plasma resonance");
    }
    if (w >= params.lc_cutoff()) {
        throw std::invalid_argument("dispersion_k: frequency at or above LC cut-off");
    }
    const double u = w / params.omega_j;
    const double k = w * std::sqrt(params.l_cell * params.c_cell) / std::sqrt(1.0 - u * u);
    return {k, k * params.tan_delta * params.loss_participation / 2.0};
}

/// Coefficients of the two coupled envelope equations, per unit propagation
/// length (one junction section):
///   a_s'      = -alpha_s a_s      + i g_s conj(a_i) exp(+i dk x)
///   conj(a_i)' = -alpha_i conj(a_i) - i g_i a_s     exp(-i dk x)
struct CmeCoefficients {
    double alpha_s = 0.0;
    double alpha_i = 0.0;
    double g_s = 0.0;
    double g_i = 0.0;
    double dk = 0.0;
};

struct CmeResult {
    complexd a_s;       // signal envelope at the output, a_s(0) = 1
    complexd a_i_conj;  // conjugated idler envelope at the output, a_i(0) = 0
};

/// Integrates the envelope equations over [0, length] with the stated
/// boundary conditions (unit signal, no idler at the input).
inline CmeResult integrate_cme(const CmeCoefficients& c, double length, double rel_tol = 1e-10) {
    const auto rhs = [&c](double x, const std::array<double, 4>& y) {
        const complexd as(y[0], y[1]);
        const complexd ai(y[2], y[3]);
        const complexd rot(std::cos(c.dk * x), std::sin(c.dk * x));
        const complexd das = -c.alpha_s * as + complexd(0.0, 1.0) * c.g_s * ai * rot;
        const complexd dai = -c.alpha_i * ai - complexd(0.0, 1.0) * c.g_i * as * std::conj(rot);
        return std::array<double, 4>{das.real(), das.imag(), dai.real(), dai.imag()};
    };
    const auto y = ode::integrate_adaptive<4>(rhs, {1.0, 0.0, 0.0, 0.0}, 0.0, length, rel_tol, 1e-14);
    return {complexd(y[0], y[1]), complexd(y[2], y[3])};
}

/// Device-convention coefficients at one signal frequency. Linear phase and
/// loss are carried per junction section; the parametric cross-phase
/// (k rho^2/4), pump self-phase (k_p rho^2/8) and coupling (k rho^2/8) are
/// per cell and spread over its junctions.
struct CmeSetup {
    CmeCoefficients coeffs;
    double k_s = 0.0, k_i = 0.0;      // real per-section wavenumbers
    double phi_s = 0.0, phi_i = 0.0;  // nonlinear phase per section
    double f_idler_hz = 0.0;
};

inline CmeSetup cme_setup(const TwpaParams& params, const PumpSetting& pump, Frequency f_signal) {
    const double rho = pump.ratio_or(params);
    const Frequency f_idler = noise::idler_frequency(Frequency(pump.f_pump_hz), f_signal);
    const complexd ks_c = dispersion_k(params, f_signal);
    const complexd ki_c = dispersion_k(params, f_idler);
    const double kp = dispersion_k(params, Frequency(pump.f_pump_hz)).real();
    const double ks = ks_c.real();
    const double ki = ki_c.real();
    const double j = params.junctions_per_cell;
    const double r2 = rho * rho;

    const double phase_p = kp * r2 / 8.0 / j;  // pump self-phase per section
    const double phase_s = ks * r2 / 4.0 / j;  // signal cross-phase per section
    const double phase_i = ki * r2 / 4.0 / j;

    CmeSetup s;
    s.k_s = ks;
    s.k_i = ki;
    s.phi_s = phase_s;
    s.phi_i = phase_i;
    s.f_idler_hz = f_idler.hertz();
    s.coeffs.alpha_s = ks_c.imag();
    s.coeffs.alpha_i = ki_c.imag();
    s.coeffs.g_s = ks * r2 / 8.0 / j;
    s.coeffs.g_i = ki * r2 / 8.0 / j;
    s.coeffs.dk = (2.0 * kp - ks - ki) + (2.0 * phase_p - phase_s - phase_i);
    return s;
}

/// Pumped and unpumped transmission of the bare line (no port mirrors) plus
/// the idler conversion amplitude at one signal frequency.
inline TransmissionPoint cme_integrate(const TwpaParams& params, const PumpSetting& pump,
                                       Frequency f_signal) {
    params.validate();
    const double n = params.total_junctions();
    const double rho = pump.ratio_or(params);

    if (rho == 0.0) {
        // Pump off: both transmissions are the bare lossy line, no idler.
        const complexd ks_c = dispersion_k(params, f_signal);
        const complexd s_off = std::exp(complexd(-ks_c.imag() * n, ks_c.real() * n));
        return {f_signal.hertz(), s_off, s_off, complexd(0.0, 0.0)};
    }

    const CmeSetup s = cme_setup(params, pump, f_signal);
    const CmeResult r = integrate_cme(s.coeffs, n);

    TransmissionPoint out;
    out.f_signal_hz = f_signal.hertz();
    out.s_on = r.a_s * std::exp(complexd(0.0, (s.k_s + s.phi_s) * n));
    out.s_off = std::exp(complexd(-s.coeffs.alpha_s * n, s.k_s * n));
    out.g_conv = std::conj(r.a_i_conj) * std::exp(complexd(0.0, (s.k_i + s.phi_i) * n));
    return out;
}

/// Port-mirror dressing of the bare transmissions: partial reflectors with
/// reflection r at input and output, backward waves propagating as s_off.
inline std::pair<complexd, complexd> fabry_perot_dress(complexd s_on, complexd s_off, double r) {
    if (!(std::abs(r) < 1.0)) throw std::invalid_argument("fabry_perot_dress: |r| must be < 1");
    const double r2 = r * r;
    const double t2 = 1.0 - r2;
    const complexd den_on = 1.0 - r2 * s_off * s_on;
    const complexd den_off = 1.0 - r2 * s_off * s_off;
    if (std::abs(den_on) < 1e-12 || std::abs(den_off) < 1e-12) {
        throw std::runtime_error("fabry_perot_dress: cavity resonance singularity");
    }
    return {t2 * s_on / den_on, t2 * s_off / den_off};
}

struct SweepPoint {
    double f_hz = 0.0;
    double gain_db = 0.0;       // dressed pumped transmission
    double loss_db = 0.0;       // dressed unpumped attenuation (positive)
    double conv_gain_db = 0.0;  // bare idler conversion
};

inline std::vector<SweepPoint> gain_sweep(const TwpaParams& params, const PumpSetting& pump,
                                          std::span<const double> f_grid_hz) {
    std::vector<SweepPoint> out;
    out.reserve(f_grid_hz.size());
    for (const double f : f_grid_hz) {
        const TransmissionPoint p = cme_integrate(params, pump, Frequency(f));
        const auto [don, doff] = fabry_perot_dress(p.s_on, p.s_off, params.r_mirror);
        SweepPoint sp;
        sp.f_hz = f;
        sp.gain_db = 10.0 * std::log10(std::norm(don));
        sp.loss_db = -10.0 * std::log10(std::norm(doff));
        sp.conv_gain_db = (std::norm(p.g_conv) > 0.0)
                              ? 10.0 * std::log10(std::norm(p.g_conv))
                              : -std::numeric_limits<double>::infinity();
        out.push_back(sp);
    }
    return out;
}

} // namespace cryonoise::twpa
