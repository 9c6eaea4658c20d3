#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cryonoise/ode.hpp"

namespace cryonoise::thermal {

/// Thermal model of the noise-source body: a copper mass suspended on two
/// parallel weak-link channels (steel screws, alumina bead stacks), each with
/// a power-law conductivity kappa(T) = a T^n whose prefactor is anchored to a
/// conductivity integral evaluated between anchor_t_cold and anchor_t_hot.
struct ThermalConfig {
    double mass_kg = 0.45;
    int screw_count = 3;
    double screw_area_over_length_m = 1.414e-4;  // per screw
    double bead_area_over_length_m = 3.9e-3;     // all bead stacks combined

    double q_steel_1k_w_per_cm = 7.2e-4;  // integral of kappa over the anchor span
    double q_alox_1k_w_per_cm = 7.8e-5;
    double n_steel = 1.2;
    double n_alox = 2.7;
    double anchor_t_hot_k = 1.0;
    double anchor_t_cold_k = 0.1;

    // Heat capacity C(T) = mass (gamma T + beta T^3). Calibration knobs: the
    // 0.45 kg body is not pure copper (attenuators, heater bobbin, wiring).
    double gamma_j_per_kg_k2 = 0.12;
    double beta_j_per_kg_k4 = 1.0e-4;

    void validate() const {
        if (!(mass_kg > 0.0)) throw std::invalid_argument("thermal: mass must be > 0");
        if (screw_count < 0) throw std::invalid_argument("thermal: screw count must be >= 0");
        if (screw_area_over_length_m < 0.0 || bead_area_over_length_m < 0.0) {
            throw std::invalid_argument("thermal: geometry factors must be >= 0");
        }
        if (!(q_steel_1k_w_per_cm > 0.0) || !(q_alox_1k_w_per_cm > 0.0)) {
            throw std::invalid_argument("thermal: conductivity anchors must be > 0");
        }
        if (!(anchor_t_hot_k > anchor_t_cold_k) || !(anchor_t_cold_k > 0.0)) {
            throw std::invalid_argument("thermal: anchor temperatures must satisfy hot > cold > 0");
        }
        if (!(gamma_j_per_kg_k2 > 0.0) || beta_j_per_kg_k4 < 0.0) {
            throw std::invalid_argument("thermal: heat-capacity coefficients out of range");
        }
    }

    /// Conductivity prefactor a [W/(m K^(n+1))] from the anchored integral.
    static double prefactor(double q_w_per_cm, double n, double t_hot, double t_cold) {
        const double span = std::pow(t_hot, n + 1.0) - std::pow(t_cold, n + 1.0);
        return q_w_per_cm * 100.0 * (n + 1.0) / span;  // W/cm -> W/m
    }
    double steel_prefactor() const {
        return prefactor(q_steel_1k_w_per_cm, n_steel, anchor_t_hot_k, anchor_t_cold_k);
    }
    double alox_prefactor() const {
        return prefactor(q_alox_1k_w_per_cm, n_alox, anchor_t_hot_k, anchor_t_cold_k);
    }
    double steel_geometry_m() const { return screw_count * screw_area_over_length_m; }
    double alox_geometry_m() const { return bead_area_over_length_m; }

    /// Default configuration: bead geometry as measured, per-screw geometry
    /// solved so the total leak power across the anchor span is exactly the
    /// design value (100 uW between 1 K and 0.1 K).
    static ThermalConfig paper_default() {
        ThermalConfig c;
        const double p_total = 100e-6;
        const double p_alox = c.bead_area_over_length_m * 100.0 * c.q_alox_1k_w_per_cm;
        c.screw_area_over_length_m =
            (p_total - p_alox) / (c.q_steel_1k_w_per_cm * 100.0) / c.screw_count;
        return c;
    }
};

/// Heat conducted from t_hot to t_cold through both weak-link channels:
/// P = sum_ch (A/L) * integral of kappa_ch over [t_cold, t_hot].
inline double weak_link_power(const ThermalConfig& cfg, double t_hot, double t_cold) {
    cfg.validate();
    if (!(t_cold > 0.0) || t_hot < t_cold) {
        throw std::invalid_argument("weak_link_power: need t_hot >= t_cold > 0");
    }
    const auto channel = [&](double aol_m, double a, double n) {
        return aol_m * a * (std::pow(t_hot, n + 1.0) - std::pow(t_cold, n + 1.0)) / (n + 1.0);
    };
    return channel(cfg.steel_geometry_m(), cfg.steel_prefactor(), cfg.n_steel) +
           channel(cfg.alox_geometry_m(), cfg.alox_prefactor(), cfg.n_alox);
}

/// Per-channel conductance G = dP/dT_hot = (A/L) kappa(T).
inline double steel_conductance(const ThermalConfig& cfg, double t) {
    return cfg.steel_geometry_m() * cfg.steel_prefactor() * std::pow(t, cfg.n_steel);
}
inline double alox_conductance(const ThermalConfig& cfg, double t) {
    return cfg.alox_geometry_m() * cfg.alox_prefactor() * std::pow(t, cfg.n_alox);
}
inline double weak_link_conductance(const ThermalConfig& cfg, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("weak_link_conductance: temperature must be > 0");
    return steel_conductance(cfg, t) + alox_conductance(cfg, t);
}

/// Steady-state heater power holding the body at t_set against a flange at
/// t_flange (radiation neglected).
inline double heater_power_for_setpoint(const ThermalConfig& cfg, double t_set, double t_flange) {
    if (t_set < t_flange) {
        throw std::invalid_argument("heater_power_for_setpoint: setpoint below flange temperature");
    }
    if (t_set == t_flange) return 0.0;
    return weak_link_power(cfg, t_set, t_flange);
}

inline double heat_capacity(const ThermalConfig& cfg, double t) {
    return cfg.mass_kg * (cfg.gamma_j_per_kg_k2 * t + cfg.beta_j_per_kg_k4 * t * t * t);
}

/// Thermal time constant tau(T) = C(T) / G(T).
inline double time_constant(const ThermalConfig& cfg, double t) {
    cfg.validate();
    if (!(t > 0.0)) throw std::invalid_argument("time_constant: temperature must be > 0");
    return heat_capacity(cfg, t) / weak_link_conductance(cfg, t);
}

struct DecayCurve {
    std::vector<double> time_s;
    std::vector<double> temperature_k;

    void validate() const {
        if (time_s.size() != temperature_k.size()) {
            throw std::invalid_argument("decay curve: column lengths differ");
        }
        for (std::size_t i = 1; i < time_s.size(); ++i) {
            if (!(time_s[i] > time_s[i - 1])) {
                throw std::invalid_argument("decay curve: time must be strictly increasing");
            }
        }
        for (double t : temperature_k) {
            if (!(t > 0.0)) throw std::invalid_argument("decay curve: temperatures must be > 0");
        }
    }
};

/// Integrates C(T) dT/dt = heater - P_leak(T, t_flange) from t_start, sampling
/// every dt_s for duration_s.
inline DecayCurve simulate_decay(const ThermalConfig& cfg, double t_start, double t_flange,
                                 double heater_w, double duration_s, double dt_s) {
    cfg.validate();
    if (!(dt_s > 0.0)) throw std::invalid_argument("simulate_decay: dt must be > 0");
    if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_decay: duration must be > 0");
    if (!(t_flange > 0.0) || t_start < t_flange) {
        throw std::invalid_argument("simulate_decay: need t_start >= t_flange > 0");
    }
    if (heater_w < 0.0) throw std::invalid_argument("simulate_decay: heater power must be >= 0");

    const auto rhs = [&](double, const std::array<double, 1>& y) {
        const double t = std::max(y[0], t_flange);
        return std::array<double, 1>{(heater_w - weak_link_power(cfg, t, t_flange)) /
                                     heat_capacity(cfg, t)};
    };

    DecayCurve curve;
    const auto n_out = static_cast<std::size_t>(std::floor(duration_s / dt_s)) + 1;
    curve.time_s.reserve(n_out);
    curve.temperature_k.reserve(n_out);
    std::array<double, 1> y{t_start};
    curve.time_s.push_back(0.0);
    curve.temperature_k.push_back(t_start);
    for (std::size_t i = 1; i < n_out; ++i) {
        const double t0 = (i - 1) * dt_s;
        const double t1 = i * dt_s;
        y = ode::integrate_adaptive<1>(rhs, y, t0, t1, 1e-10, 1e-12);
        curve.time_s.push_back(t1);
        curve.temperature_k.push_back(y[0]);
    }
    return curve;
}

struct DecayFit {
    double tau_s = 0.0;
    double tau_err_s = 0.0;
    double t_inf_k = 0.0;
    double delta_k = 0.0;
};

namespace detail {
// For fixed tau, the amplitude pair (t_inf, delta) is linear; returns the SSE.
inline double decay_sse(const DecayCurve& c, double tau, double* t_inf = nullptr,
                        double* delta = nullptr) {
    const std::size_t n = c.time_s.size();
    double s11 = static_cast<double>(n), s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-c.time_s[i] / tau);
        s12 += e;
        s22 += e * e;
        b1 += c.temperature_k[i];
        b2 += e * c.temperature_k[i];
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
    const double a = (s22 * b1 - s12 * b2) / det;   // t_inf
    const double d = (-s12 * b1 + s11 * b2) / det;  // delta
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = c.temperature_k[i] - (a + d * std::exp(-c.time_s[i] / tau));
        sse += r * r;
    }
    if (t_inf) *t_inf = a;
    if (delta) *delta = d;
    return sse;
}
} // namespace detail

/// Least-squares fit of T(t) = T_inf + dT exp(-t/tau). tau is found by golden
/// section on the profiled SSE; tau_err comes from the 3-parameter covariance.
inline DecayFit fit_exponential_decay(const DecayCurve& curve) {
    curve.validate();
    const std::size_t n = curve.time_s.size();
    if (n < 5) throw std::invalid_argument("fit_exponential_decay: need at least 5 samples");
    if (!(curve.temperature_k.front() > curve.temperature_k.back())) {
        throw std::invalid_argument("fit_exponential_decay: data do not decay");
    }

    const double span = curve.time_s.back() - curve.time_s.front();
    double lo = std::log(span * 1e-3);
    double hi = std::log(span * 1e3);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = detail::decay_sse(curve, std::exp(x1));
    double f2 = detail::decay_sse(curve, std::exp(x2));
    for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = detail::decay_sse(curve, std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = detail::decay_sse(curve, std::exp(x2));
        }
    }
    const double tau = std::exp(0.5 * (lo + hi));
    double t_inf = 0.0, delta = 0.0;
    const double sse = detail::decay_sse(curve, tau, &t_inf, &delta);
    if (!(delta > 0.0)) throw std::invalid_argument("fit_exponential_decay: data do not decay");

    // Covariance of (t_inf, delta, tau) from the Gauss-Newton normal matrix.
    double jtj[3][3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-curve.time_s[i] / tau);
        const double j[3] = {1.0, e, delta * curve.time_s[i] / (tau * tau) * e};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) jtj[r][c] += j[r] * j[c];
        }
    }
    // Invert the symmetric 3x3 (cofactor form); only the tau diagonal is used.
    const double det = jtj[0][0] * (jtj[1][1] * jtj[2][2] - jtj[1][2] * jtj[2][1]) -
                       jtj[0][1] * (jtj[1][0] * jtj[2][2] - jtj[1][2] * jtj[2][0]) +
                       jtj[0][2] * (jtj[1][0] * jtj[2][1] - jtj[1][1] * jtj[2][0]);
    double tau_err = 0.0;
    if (std::abs(det) > 1e-300 && n > 3) {
        const double cof_tt = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        const double sigma2 = sse / static_cast<double>(n - 3);
        const double var_tau = sigma2 * cof_tt / det;
        tau_err = var_tau > 0.0 ? std::sqrt(var_tau) : 0.0;
    }
    return {tau, tau_err, t_inf, delta};
}

} // namespace cryonoise::thermal
