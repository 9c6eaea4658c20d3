#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cryonoise/vlab.hpp"

using namespace cryonoise;
using namespace cryonoise::vlab;
using namespace cryonoise::yfactor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CampaignPlan thru_plan(std::vector<double> freqs = {6e9}) {
    CampaignPlan plan;
    plan.path = SignalPath::Thru;
    for (int i = 0; i < 12; ++i) plan.setpoints_k.push_back(0.135 + (3.6 - 0.135) * i / 11.0);
    plan.f_signal_hz = std::move(freqs);
    return plan;
}

CampaignTruth thru_truth() {
    CampaignTruth truth;
    truth.chain.g_hemt = db_to_linear(40.0);
    truth.chain.t_hemt_k = 3.13;
    truth.chain.t_bkg_k = 300.0;
    truth.chain.bandwidth_hz = 100.0;
    truth.g_tot_db = 93.0;
    return truth;
}

CampaignPlan twpa_plan() {
    CampaignPlan plan;
    plan.path = SignalPath::Twpa;
    plan.f_pump_hz = 5.968e9;
    for (int i = 0; i < 10; ++i) plan.setpoints_k.push_back(0.135 + (0.9 - 0.135) * i / 9.0);
    plan.f_signal_hz = {5.735e9};
    return plan;
}

CampaignTruth twpa_truth() {
    CampaignTruth truth;
    truth.chain.g_hemt = db_to_linear(40.0);
    truth.chain.t_hemt_k = 3.13;
    truth.chain.t_bkg_k = 300.0;
    truth.chain.t_twpa_k = 0.35;
    truth.chain.bandwidth_hz = 100.0;
    // Explicit gains: 10 dB signal, conversion per photon-flux bookkeeping.
    const double g_conv = (6.201 / 5.735) * (10.0 - 1.0);
    truth.chain.twpa_gain_db = noise::GainTable{{5.735e9}, {10.0}};
    truth.chain.conv_gain_db = noise::GainTable{{5.735e9}, {linear_to_db(g_conv)}};
    truth.g_tot_db = 93.0;
    return truth;
}

} // namespace

TEST_CASE("identical seeds give identical campaigns") {
    InstrumentErrors errors;
    errors.thermometer_sigma_k = 6e-3;
    errors.analyzer_sigma_db = 0.25;
    errors.switch_repeatability_db = 0.5;
    errors.seed = 20240707;
    const auto a = simulate_campaign(thru_plan({5.9e9, 6.1e9}), thru_truth(), errors);
    const auto b = simulate_campaign(thru_plan({5.9e9, 6.1e9}), thru_truth(), errors);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].t_bath_k == b.samples[i].t_bath_k);
        CHECK(a.samples[i].p_out_w == b.samples[i].p_out_w);
    }
    InstrumentErrors other = errors;
    other.seed = 1;
    const auto c = simulate_campaign(thru_plan({5.9e9, 6.1e9}), thru_truth(), other);
    CHECK(c.samples[0].p_out_w != a.samples[0].p_out_w);
}

TEST_CASE("noiseless campaign round-trips the truth offset exactly") {
    InstrumentErrors zero;
    const auto campaign = simulate_campaign(thru_plan(), thru_truth(), zero);
    REQUIRE(campaign.samples.size() == 12);
    const auto pts = build_fit_points(campaign.samples);
    const auto rep = fit_yfactor(pts);
    const double t_added_true = campaign.sidecar.per_frequency[0].t_added_true_k;
    CHECK_THAT(rep.offset, WithinRel(t_added_true, 1e-9));
    CHECK_THAT(rep.alpha, WithinRel(campaign.sidecar.per_frequency[0].alpha_true_k_per_w, 1e-9));

    // Output power grows strictly with the setpoint before noise injection.
    for (std::size_t i = 1; i < campaign.samples.size(); ++i) {
        CHECK(campaign.samples[i].p_out_w > campaign.samples[i - 1].p_out_w);
    }
}

TEST_CASE("noiseless preamplified campaign recovers the intrinsic noise") {
    InstrumentErrors zero;
    const auto thru = simulate_campaign(thru_plan({5.735e9}), thru_truth(), zero);
    const auto tw = simulate_campaign(twpa_plan(), twpa_truth(), zero);

    const auto thru_fit = fit_yfactor(build_fit_points(thru.samples));
    const auto gains = average_gains(tw.samples);
    const auto tw_fit = fit_yfactor(build_fit_points(tw.samples, &gains));

    const double t_sys_thru = system_noise_at_base(thru_fit, Frequency(5.735e9));
    const double t_sys_twpa = system_noise_at_base(tw_fit, Frequency(5.735e9),
                                                   Frequency(6.201e9), gains);
    CHECK_THAT(t_sys_thru, WithinRel(thru.sidecar.per_frequency[0].t_sys_true_k, 1e-9));
    CHECK_THAT(t_sys_twpa, WithinRel(tw.sidecar.per_frequency[0].t_sys_true_k, 1e-9));

    // The two-path difference keeps the effective input noise on board:
    // t_twpa + T_in_eff(base) - T_in(base)/g, evaluated from the truth.
    const auto point = intrinsic_twpa_report({t_sys_thru, 0.0, 0.0}, {t_sys_twpa, 0.0, 0.0},
                                             gains, Frequency(5.735e9));
    const double ratio = db_to_linear(tw.sidecar.chain.conv_gain_db->db_at(5.735e9) -
                                      tw.sidecar.chain.twpa_gain_db->db_at(5.735e9));
    const double expect = 0.35 +
                          noise::effective_input_noise_k(5.735e9, 5.968e9, 0.010, ratio) -
                          noise::planck_input_noise_k(5.735e9, 0.010) / db_to_linear(10.0);
    CHECK_THAT(point.t_twpa_k.value, WithinRel(expect, 1e-9));
}

TEST_CASE("noisy preamplified campaigns cover the intrinsic truth") {
    InstrumentErrors errors;
    errors.thermometer_sigma_k = 6e-3;
    errors.analyzer_sigma_db = 0.25;

    // Deterministic truth of the two-path difference, as above.
    const double ratio = db_to_linear(linear_to_db((6.201 / 5.735) * 9.0) - 10.0);
    const double truth_diff = 0.35 +
                              noise::effective_input_noise_k(5.735e9, 5.968e9, 0.010, ratio) -
                              noise::planck_input_noise_k(5.735e9, 0.010) / db_to_linear(10.0);

    int covered = 0;
    const int trials = 60;
    for (int tr = 0; tr < trials; ++tr) {
        errors.seed = 5000 + tr;
        const auto thru = simulate_campaign(thru_plan({5.735e9}), thru_truth(), errors);
        const auto tw = simulate_campaign(twpa_plan(), twpa_truth(), errors);
        const auto thru_fit = fit_yfactor(build_fit_points(thru.samples));
        const auto gains = average_gains(tw.samples);
        const auto tw_fit = fit_yfactor(build_fit_points(tw.samples, &gains));
        const AsymValue thru_v{system_noise_at_base(thru_fit, Frequency(5.735e9)),
                               thru_fit.offset_err, thru_fit.offset_err};
        const AsymValue tw_v{system_noise_at_base(tw_fit, Frequency(5.735e9),
                                                  Frequency(6.201e9), gains),
                             tw_fit.offset_err, tw_fit.offset_err};
        const auto point = intrinsic_twpa_report(thru_v, tw_v, gains, Frequency(5.735e9));
        if (truth_diff >= point.t_twpa_k.value - point.t_twpa_k.err_lo &&
            truth_diff <= point.t_twpa_k.value + point.t_twpa_k.err_hi) {
            ++covered;
        }
    }
    // Linear (worst-case) bar addition is conservative, so coverage of the
    // combined interval clears the 1-sigma rate comfortably.
    CHECK(covered >= static_cast<int>(0.68 * trials));
}

TEST_CASE("per-path switch offset is systematic and frequency-gated") {
    InstrumentErrors errors;
    errors.switch_repeatability_db = 0.5;
    errors.seed = 5150;
    // No thermometer/analyzer noise: the only perturbation is the switch.
    const auto campaign = simulate_campaign(thru_plan({5.9e9, 6.5e9, 7.0e9}), thru_truth(), errors);
    const auto& side = campaign.sidecar.per_frequency;
    REQUIRE(side.size() == 3);
    CHECK(side[0].switch_offset_db == 0.0);          // below the 6 GHz threshold
    CHECK(side[1].switch_offset_db != 0.0);
    CHECK(side[1].switch_offset_db == side[2].switch_offset_db);  // one draw per path

    // A uniform dB offset rescales the power axis; the fit offset is immune.
    std::vector<NoiseSample> hi(campaign.samples.begin() + 12, campaign.samples.begin() + 24);
    const auto rep = fit_yfactor(build_fit_points(hi));
    CHECK_THAT(rep.offset, WithinRel(side[1].t_added_true_k, 1e-9));
}

TEST_CASE("snr bookkeeping flags weak samples") {
    InstrumentErrors errors;
    errors.analyzer_noise_floor_w_per_hz = 1e-22;
    auto truth = thru_truth();
    const auto ok = simulate_campaign(thru_plan(), truth, errors);
    for (bool flag : ok.sidecar.per_frequency[0].snr_ok) CHECK(flag);

    truth.g_tot_db = 0.0;  // no gain: everything sits under the floor
    const auto weak = simulate_campaign(thru_plan(), truth, errors);
    for (bool flag : weak.sidecar.per_frequency[0].snr_ok) CHECK_FALSE(flag);
}

TEST_CASE("plan validation") {
    auto plan = twpa_plan();
    plan.setpoints_k.push_back(1.2);  // above the saturation bound
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = twpa_plan();
    plan.f_pump_hz.reset();
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = twpa_plan();
    plan.span_hz = 10.0;
    plan.rbw_hz = 100.0;
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = twpa_plan();
    plan.wait_tau_multiple = 1.0;
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);

    auto truth = twpa_truth();
    truth.chain.t_twpa_k.reset();
    CHECK_THROWS_AS(simulate_campaign(twpa_plan(), truth, InstrumentErrors{}),
                    std::invalid_argument);
}

TEST_CASE("samples do not leak the sidecar truth") {
    InstrumentErrors errors;
    errors.thermometer_sigma_k = 6e-3;
    errors.analyzer_sigma_db = 0.25;
    errors.seed = 31337;
    const auto campaign = simulate_campaign(thru_plan(), thru_truth(), errors);
    const double alpha_true = campaign.sidecar.per_frequency[0].alpha_true_k_per_w;
    int exact_hits = 0;
    for (std::size_t i = 0; i < campaign.samples.size(); ++i) {
        const auto& s = campaign.samples[i];
        const double t_set = thru_plan().setpoints_k[i];
        // Measured values are perturbed away from the noiseless forward model.
        if (s.t_bath_k == t_set) ++exact_hits;
        const double p_true = (noise::planck_input_noise_k(6e9, t_set) +
                               campaign.sidecar.per_frequency[0].t_added_true_k) /
                              alpha_true;
        if (s.p_out_w == p_true) ++exact_hits;
    }
    CHECK(exact_hits == 0);
}

TEST_CASE("stream splitting is deterministic and collision-free") {
    const auto s0 = rng::derive_stream_seed(123, 0);
    CHECK(s0 == rng::derive_stream_seed(123, 0));
    CHECK(s0 != rng::derive_stream_seed(123, 1));
    CHECK(s0 != rng::derive_stream_seed(124, 0));
}

TEST_CASE("pump back-action budget") {
    const auto b = pump_backaction_budget(15.0, 16.5, 0.14e-9, 100e-6);
    CHECK_THAT(b.leakage_w, WithinRel(7.561398318231407e-12, 1e-12));
    CHECK_THAT(b.ratio, WithinRel(7.561398318231406e-08, 1e-12));
    CHECK(b.ratio <= 1e-6);

    const auto none = pump_backaction_budget(15.0, 16.5, 0.0, 100e-6);
    CHECK(none.leakage_w == 0.0);
    CHECK_THROWS_AS(pump_backaction_budget(15.0, 16.5, 1e-10, 0.0), std::invalid_argument);
}
