#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cryonoise/noise.hpp"
#include "cryonoise/rng.hpp"
#include "cryonoise/twpa.hpp"
#include "cryonoise/yfactor.hpp"

namespace cryonoise::vlab {

/// What to measure: one path, a temperature ladder and a frequency grid.
struct CampaignPlan {
    yfactor::SignalPath path = yfactor::SignalPath::Thru;
    std::vector<double> setpoints_k;
    std::vector<double> f_signal_hz;
    std::optional<double> f_pump_hz;
    double span_hz = 10e3;
    double rbw_hz = 100.0;
    double probe_power_w = 1e-16;
    double wait_tau_multiple = 2.5;  // recorded metadata; equilibrium is assumed

    static constexpr double twpa_saturation_bath_k = 0.9;

    void validate() const {
        if (setpoints_k.empty()) throw std::invalid_argument("plan: no setpoints");
        if (f_signal_hz.empty()) throw std::invalid_argument("plan: no frequencies");
        for (double t : setpoints_k) {
            if (!(t > 0.0)) throw std::invalid_argument("plan: setpoints must be > 0 K");
        }
        for (double f : f_signal_hz) {
            if (!(f > 0.0)) throw std::invalid_argument("plan: frequencies must be > 0 Hz");
        }
        if (!(span_hz > 0.0) || !(rbw_hz > 0.0) || span_hz / rbw_hz < 1.0) {
            throw std::invalid_argument("plan: span/rbw must be >= 1");
        }
        if (wait_tau_multiple < 2.5) {
            throw std::invalid_argument("plan: wait rule must be >= 2.5 time constants");
        }
        if (path == yfactor::SignalPath::Twpa) {
            if (!f_pump_hz) throw std::invalid_argument("plan: Twpa path needs a pump frequency");
            for (double t : setpoints_k) {
                if (t > twpa_saturation_bath_k) {
                    throw std::invalid_argument(
                        "plan: Twpa setpoints above the saturation bound of 0.9 K");
                }
            }
        }
    }
};

/// Instrument error magnitudes; all Gaussian in their natural domain
/// (kelvin for the thermometer, dB for the analyzer and switch).
struct InstrumentErrors {
    double thermometer_sigma_k = 0.0;
    double analyzer_sigma_db = 0.0;
    double switch_repeatability_db = 0.0;  // applies above switch_threshold_hz
    double switch_threshold_hz = 6e9;
    double analyzer_noise_floor_w_per_hz = 1e-22;
    std::uint64_t seed = 0;

    void validate() const {
        if (thermometer_sigma_k < 0.0 || analyzer_sigma_db < 0.0 ||
            switch_repeatability_db < 0.0 || analyzer_noise_floor_w_per_hz < 0.0) {
            throw std::invalid_argument("instrument errors must be >= 0");
        }
    }
};

/// Ground truth recorded per frequency next to the emitted samples.
struct FrequencyTruth {
    double f_hz = 0.0;
    double f_idler_hz = 0.0;       // Twpa only
    double g_twpa_db = 0.0;        // Twpa only
    double g_conv_db = 0.0;        // Twpa only
    double t_added_true_k = 0.0;   // fit-offset truth
    double t_sys_true_k = 0.0;     // at the 10 mK reference bath
    double alpha_true_k_per_w = 0.0;
    double switch_offset_db = 0.0;
    std::vector<bool> snr_ok;      // per setpoint
};

/// Chain truth plus the downstream gain common to both paths. The sidecar is
/// emitted separately from the sample table and is the only place the truth
/// appears.
struct CampaignTruth {
    noise::ChainConfig chain;
    std::optional<twpa::TwpaParams> twpa;
    double g_tot_db = 93.0;  // source-to-analyzer gain excluding the preamp
    std::vector<FrequencyTruth> per_frequency;
};

struct Campaign {
    std::vector<yfactor::NoiseSample> samples;
    CampaignTruth sidecar;
};

namespace detail {

struct PathGains {
    double g_twpa_db = 0.0;
    double g_conv_db = 0.0;
};

/// Truth gains for a Twpa campaign: explicit per-frequency tables win;
/// otherwise the device model supplies the dressed signal gain and the bare
/// conversion gain.
inline PathGains truth_gains(const CampaignTruth& truth, double f_hz, double f_pump_hz) {
    if (truth.chain.twpa_gain_db) {
        return {truth.chain.twpa_gain_db->db_at(f_hz), truth.chain.conv_gain_db->db_at(f_hz)};
    }
    if (!truth.twpa) {
        throw std::invalid_argument(
            "campaign truth: Twpa path needs explicit gains or device parameters");
    }
    const twpa::PumpSetting pump{f_pump_hz, std::nullopt};
    const auto point = twpa::cme_integrate(*truth.twpa, pump, Frequency(f_hz));
    const auto [don, doff] = twpa::fabry_perot_dress(point.s_on, point.s_off,
                                                     truth.twpa->r_mirror);
    return {10.0 * std::log10(std::norm(don)), 10.0 * std::log10(std::norm(point.g_conv))};
}

} // namespace detail

/// Generates one measurement campaign: forward-models the output power at
/// every (setpoint, frequency), perturbs it with the seeded instrument error
/// models and emits the sample table plus the truth sidecar.
///
/// Draw order (fixed for reproducibility): per frequency index i the stream
/// derive_stream_seed(seed, i) supplies, per setpoint, the thermometer draw,
/// the analyzer power draw, then on the Twpa path the two gain-readout draws.
/// Stream 0xFFFFFFFF supplies the single per-path switch offset.
inline Campaign simulate_campaign(const CampaignPlan& plan, CampaignTruth truth,
                                  const InstrumentErrors& errors) {
    plan.validate();
    truth.chain.validate();
    errors.validate();
    const bool is_twpa = plan.path == yfactor::SignalPath::Twpa;
    if (is_twpa && !truth.chain.t_twpa_k) {
        throw std::invalid_argument("campaign truth: Twpa path needs t_twpa_k");
    }

    const double g_tot = db_to_linear(truth.g_tot_db);
    const double b_hz = plan.rbw_hz;
    const auto& chain = truth.chain;

    rng::GaussianRng switch_rng(rng::derive_stream_seed(errors.seed, 0xFFFFFFFFull));
    const double switch_draw_db = switch_rng.normal(0.0, errors.switch_repeatability_db);

    Campaign out;
    out.samples.reserve(plan.f_signal_hz.size() * plan.setpoints_k.size());
    truth.per_frequency.clear();

    for (std::size_t fi = 0; fi < plan.f_signal_hz.size(); ++fi) {
        const double f = plan.f_signal_hz[fi];
        rng::GaussianRng g(rng::derive_stream_seed(errors.seed, fi));

        FrequencyTruth ft;
        ft.f_hz = f;
        ft.switch_offset_db = (f > errors.switch_threshold_hz) ? switch_draw_db : 0.0;

        detail::PathGains gains;
        double g_path = g_tot;
        double t_added = chain.t_hemt_k + chain.t_bkg_k / chain.g_hemt;
        double conv_ratio = 0.0;
        if (is_twpa) {
            gains = detail::truth_gains(truth, f, *plan.f_pump_hz);
            ft.f_idler_hz =
                noise::idler_frequency(Frequency(*plan.f_pump_hz), Frequency(f)).hertz();
            ft.g_twpa_db = gains.g_twpa_db;
            ft.g_conv_db = gains.g_conv_db;
            const double g_twpa = db_to_linear(gains.g_twpa_db);
            conv_ratio = db_to_linear(gains.g_conv_db - gains.g_twpa_db);
            g_path = g_tot * g_twpa;
            t_added = *chain.t_twpa_k + chain.t_hemt_k / g_twpa +
                      chain.t_bkg_k / (chain.g_hemt * g_twpa);
        }
        ft.t_added_true_k = t_added;
        ft.alpha_true_k_per_w = 1.0 / (g_path * boltzmann_constant * b_hz);
        const double t_in_base =
            is_twpa ? noise::effective_input_noise_k(f, *plan.f_pump_hz,
                                                     yfactor::reference_bath_k, conv_ratio)
                    : noise::planck_input_noise_k(f, yfactor::reference_bath_k);
        ft.t_sys_true_k = t_added + t_in_base;

        for (double t_set : plan.setpoints_k) {
            const double t_in =
                is_twpa ? noise::effective_input_noise_k(f, *plan.f_pump_hz, t_set, conv_ratio)
                        : noise::planck_input_noise_k(f, t_set);
            const double p_true = g_path * boltzmann_constant * b_hz * (t_in + t_added);
            ft.snr_ok.push_back(p_true / b_hz >=
                                10.0 * errors.analyzer_noise_floor_w_per_hz);

            yfactor::NoiseSample s;
            s.path = plan.path;
            s.f_signal_hz = f;
            s.t_bath_k = g.normal(t_set, errors.thermometer_sigma_k);
            s.t_bath_err_k = errors.thermometer_sigma_k;
            const double p_db_err = g.normal(0.0, errors.analyzer_sigma_db);
            s.p_out_w = p_true * db_to_linear(p_db_err + ft.switch_offset_db);
            s.p_out_err_db = errors.analyzer_sigma_db;
            if (is_twpa) {
                s.f_idler_hz = ft.f_idler_hz;
                s.g_twpa_db = g.normal(gains.g_twpa_db, errors.analyzer_sigma_db);
                s.g_conv_db = g.normal(gains.g_conv_db, errors.analyzer_sigma_db);
            }
            out.samples.push_back(s);
        }
        truth.per_frequency.push_back(std::move(ft));
    }
    out.sidecar = std::move(truth);
    return out;
}

struct BackactionBudget {
    double leakage_w = 0.0;
    double ratio = 0.0;  // leakage over heater power
};

/// Pump power reaching the noise source through the two leakage paths: the
/// coupler's isolated port (directivity) and the reflection off the
/// preamplifier input travelling back along the main line.
inline BackactionBudget pump_backaction_budget(double directivity_db, double twpa_reflection_db,
                                               double pump_power_at_twpa_w,
                                               double heater_power_w) {
    if (pump_power_at_twpa_w < 0.0 || !(heater_power_w > 0.0)) {
        throw std::invalid_argument("pump_backaction_budget: powers must be positive");
    }
    const double leak = pump_power_at_twpa_w *
                        (db_to_linear(-directivity_db) + db_to_linear(-twpa_reflection_db));
    return {leak, leak / heater_power_w};
}

} // namespace cryonoise::vlab
