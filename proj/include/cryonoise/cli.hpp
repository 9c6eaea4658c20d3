#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cryonoise/io.hpp"

namespace cryonoise::cli {

using io::json;

namespace detail {

inline std::string join_args(const std::vector<std::string>& args) {
    std::string out = "cryonoise";
    for (const auto& a : args) {
        out += ' ';
        out += a;
    }
    return out;
}

/// Emits a report to --out (atomic) or stdout.
inline void emit(const json& j, const std::optional<std::string>& out_path) {
    if (out_path) {
        io::atomic_write_file(*out_path, j.dump(2) + "\n");
        std::cout << json{{"written", *out_path}}.dump() << "\n";
    } else {
        std::cout << j.dump(2) << "\n";
    }
}

inline json load_json_file(const std::string& path) {
    return json::parse(io::read_file(path));
}

struct FitGroup {
    yfactor::SignalPath path;
    double f_hz;
    std::vector<yfactor::NoiseSample> samples;
};

inline std::vector<FitGroup> group_samples(const std::vector<yfactor::NoiseSample>& samples) {
    std::vector<FitGroup> groups;
    for (const auto& s : samples) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const FitGroup& g) {
            return g.path == s.path && std::abs(g.f_hz - s.f_signal_hz) <= 1e-6 * g.f_hz;
        });
        if (it == groups.end()) {
            groups.push_back({s.path, s.f_signal_hz, {}});
            it = groups.end() - 1;
        }
        it->samples.push_back(s);
    }
    return groups;
}

struct PathFit {
    FitGroup group;
    yfactor::FitReport fit;
    std::optional<yfactor::GainSummary> gains;
    double t_sys_base_k = 0.0;
    yfactor::ErrorBudget budget;
};

/// Default one-sided insertion-loss bound: -1 dB on the Thru/DirectHemt path,
/// -0.5 dB on the preamplified path above the switch-repeatability threshold
/// and zero below it.
inline double default_dg_att_db(yfactor::SignalPath path, double f_hz) {
    if (path == yfactor::SignalPath::Twpa) return f_hz >= 6e9 ? -0.5 : 0.0;
    return -1.0;
}

inline PathFit fit_group(FitGroup group, const noise::ChainConfig& chain,
                         std::optional<double> dg_att_db, double dt_att_k, double dt_bkg_k,
                         double dg_hemt) {
    PathFit out{std::move(group), {}, std::nullopt, 0.0, {}};
    std::optional<yfactor::GainSummary> gains;
    if (out.group.path == yfactor::SignalPath::Twpa) {
        gains = yfactor::average_gains(out.group.samples);
    }
    const auto pts = yfactor::build_fit_points(out.group.samples, gains ? &*gains : nullptr);
    out.fit = yfactor::fit_yfactor(pts);
    out.gains = gains;
    if (gains) {
        const double f_idler = *out.group.samples.front().f_idler_hz;
        out.t_sys_base_k = yfactor::system_noise_at_base(out.fit, Frequency(out.group.f_hz),
                                                         Frequency(f_idler), *gains);
    } else {
        out.t_sys_base_k = yfactor::system_noise_at_base(out.fit, Frequency(out.group.f_hz));
    }
    yfactor::BudgetBounds bounds;
    bounds.dg_att_db = dg_att_db.value_or(default_dg_att_db(out.group.path, out.group.f_hz));
    bounds.dt_att_k = dt_att_k;
    bounds.dt_bkg_k = dt_bkg_k;
    bounds.dg_hemt = dg_hemt;
    out.budget = yfactor::error_budget(out.fit, chain, bounds);
    return out;
}

inline json path_fit_to_json(const PathFit& pf) {
    json j{{"path", yfactor::to_string(pf.group.path)},
           {"f_signal_hz", pf.group.f_hz},
           {"n_points", pf.group.samples.size()},
           {"fit", io::to_json(pf.fit)},
           {"t_sys_base_k", pf.t_sys_base_k},
           {"budget", io::to_json(pf.budget)},
           {"t_sys_k", io::to_json(yfactor::AsymValue{pf.t_sys_base_k, pf.budget.total_lo_k,
                                                      pf.budget.total_hi_k})}};
    if (pf.gains) j["gains"] = io::to_json(*pf.gains);
    return j;
}

} // namespace detail

/// Full CLI surface; argv without the program name. Returns the process exit
/// code; structured errors go to stderr as one JSON object.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"cryogenic noise-measurement toolkit"};
    app.require_subcommand(1);

    // --- twpa ---------------------------------------------------------------
    auto* twpa_cmd = app.add_subcommand("twpa", "junction transmission-line simulation");
    twpa_cmd->require_subcommand(1);
    auto* twpa_gain = twpa_cmd->add_subcommand("gain", "sweep pumped/unpumped transmission");
    struct {
        std::string config;
        double f_min = 4e9, f_max = 8e9;
        int points = 401;
        std::optional<double> f_pump;
        std::optional<double> i_p_ratio;
        std::optional<std::string> out;
    } tg;
    twpa_gain->add_option("--config", tg.config, "device parameter JSON");
    twpa_gain->add_option("--f-min", tg.f_min, "sweep start, Hz");
    twpa_gain->add_option("--f-max", tg.f_max, "sweep end, Hz");
    twpa_gain->add_option("--points", tg.points, "number of grid points");
    twpa_gain->add_option("--f-pump", tg.f_pump, "pump frequency, Hz");
    twpa_gain->add_option("--i-p-ratio", tg.i_p_ratio, "pump current ratio override");
    twpa_gain->add_option("--out", tg.out, "output CSV path");

    // --- noise --------------------------------------------------------------
    auto* noise_cmd = app.add_subcommand("noise", "noise temperatures and Y-factor fits");
    noise_cmd->require_subcommand(1);

    auto* noise_input = noise_cmd->add_subcommand("input", "quantum-corrected input noise");
    struct {
        double f = 6e9;
        double t_bath = 0.0;
        std::optional<double> f_pump;
        std::optional<double> g_twpa_db, g_conv_db;
        std::optional<std::string> out;
    } ni;
    noise_input->add_option("--f", ni.f, "signal frequency, Hz")->required();
    noise_input->add_option("--t-bath", ni.t_bath, "bath temperature, K")->required();
    noise_input->add_option("--f-pump", ni.f_pump, "pump frequency (idler accounting), Hz");
    noise_input->add_option("--g-twpa-db", ni.g_twpa_db, "signal gain, dB");
    noise_input->add_option("--g-conv-db", ni.g_conv_db, "conversion gain, dB");
    noise_input->add_option("--out", ni.out, "output JSON path");

    auto* noise_fit = noise_cmd->add_subcommand("fit", "Y-factor fits with error budget");
    struct {
        std::string samples;
        std::optional<std::string> chain;
        std::optional<double> dg_att_db;
        double dt_att_k = -0.1;
        double dt_bkg_k = 0.0;
        double dg_hemt = 0.0;
        std::optional<std::string> check_truth;
        std::optional<std::string> out;
    } nf;
    noise_fit->add_option("--samples", nf.samples, "noise-sample CSV")->required();
    noise_fit->add_option("--chain", nf.chain, "chain config JSON");
    noise_fit->add_option("--dg-att-db", nf.dg_att_db,
                          "insertion-loss bound, dB <= 0 (default per path)");
    noise_fit->add_option("--dt-att-k", nf.dt_att_k, "attenuator temperature bound, K <= 0");
    noise_fit->add_option("--dt-bkg-k", nf.dt_bkg_k, "background noise uncertainty, K");
    noise_fit->add_option("--dg-hemt", nf.dg_hemt, "second-stage gain uncertainty, linear");
    noise_fit->add_option("--check-truth", nf.check_truth, "truth sidecar JSON to verify against");
    noise_fit->add_option("--out", nf.out, "output JSON path");

    auto* noise_photons = noise_cmd->add_subcommand("photons", "photon-number summary");
    struct {
        std::string report;
        std::optional<std::string> out;
    } np;
    noise_photons->add_option("--report", np.report, "fit-report JSON with intrinsic section")
        ->required();
    noise_photons->add_option("--out", np.out, "output JSON path");

    // --- thermal ------------------------------------------------------------
    auto* thermal_cmd = app.add_subcommand("thermal", "noise-source thermal model");
    thermal_cmd->require_subcommand(1);
    struct {
        std::optional<std::string> config;
        double t = 1.0;
        double t_hot = 1.0, t_cold = 0.1;
        double t_start = 5.0, t_flange = 0.1, heater_w = 0.0;
        double duration_s = 600.0, dt_s = 1.0;
        std::optional<std::string> out;
    } th;
    auto* thermal_tau = thermal_cmd->add_subcommand("tau", "thermal time constant");
    thermal_tau->add_option("--config", th.config, "thermal config JSON");
    thermal_tau->add_option("--t", th.t, "temperature, K")->required();
    thermal_tau->add_option("--out", th.out, "output JSON path");
    auto* thermal_power = thermal_cmd->add_subcommand("power", "weak-link heat flow");
    thermal_power->add_option("--config", th.config, "thermal config JSON");
    thermal_power->add_option("--t-hot", th.t_hot, "hot side, K")->required();
    thermal_power->add_option("--t-cold", th.t_cold, "cold side, K")->required();
    thermal_power->add_option("--out", th.out, "output JSON path");
    auto* thermal_decay = thermal_cmd->add_subcommand("decay", "temperature decay simulation");
    thermal_decay->add_option("--config", th.config, "thermal config JSON");
    thermal_decay->add_option("--t-start", th.t_start, "initial temperature, K")->required();
    thermal_decay->add_option("--t-flange", th.t_flange, "flange temperature, K")->required();
    thermal_decay->add_option("--heater-w", th.heater_w, "heater power, W");
    thermal_decay->add_option("--duration-s", th.duration_s, "simulated time, s");
    thermal_decay->add_option("--dt-s", th.dt_s, "output sampling step, s");
    thermal_decay->add_option("--out", th.out, "output CSV path");

    // --- vlab ---------------------------------------------------------------
    auto* vlab_cmd = app.add_subcommand("vlab", "virtual measurement campaigns");
    vlab_cmd->require_subcommand(1);
    auto* vlab_gen = vlab_cmd->add_subcommand("generate", "generate a seeded campaign");
    struct {
        std::string plan, truth, errors;
        std::optional<std::uint64_t> seed;
        std::string out;
        std::optional<std::string> sidecar;
    } vg;
    vlab_gen->add_option("--plan", vg.plan, "campaign plan JSON")->required();
    vlab_gen->add_option("--truth", vg.truth, "campaign truth JSON")->required();
    vlab_gen->add_option("--errors", vg.errors, "instrument errors JSON")->required();
    vlab_gen->add_option("--seed", vg.seed, "seed override");
    vlab_gen->add_option("--out", vg.out, "sample CSV path")->required();
    vlab_gen->add_option("--sidecar", vg.sidecar, "truth sidecar JSON path");

    // --- sparam -------------------------------------------------------------
    auto* sparam_cmd = app.add_subcommand("sparam", "S-parameter files");
    sparam_cmd->require_subcommand(1);
    auto* sparam_report = sparam_cmd->add_subcommand("report", "flatness and match summary");
    struct {
        std::string in;
        std::optional<std::string> out;
    } sp;
    sparam_report->add_option("--in", sp.in, "touchstone file")->required();
    sparam_report->add_option("--out", sp.out, "output JSON path");

    const std::string invocation = detail::join_args(args);
    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << json{{"error", e.what()}, {"invocation", invocation}}.dump() << "\n";
        return e.get_exit_code();
    }

    try {
        if (twpa_gain->parsed()) {
            const auto params = tg.config.empty()
                                    ? twpa::TwpaParams::device_default()
                                    : io::twpa_from_json(detail::load_json_file(tg.config));
            twpa::PumpSetting pump;
            if (tg.f_pump) pump.f_pump_hz = *tg.f_pump;
            pump.i_p_ratio = tg.i_p_ratio;
            if (tg.points < 2) throw std::invalid_argument("--points must be >= 2");
            std::vector<double> grid(tg.points);
            for (int i = 0; i < tg.points; ++i) {
                grid[i] = tg.f_min + (tg.f_max - tg.f_min) * i / (tg.points - 1);
            }
            const auto sweep = twpa::gain_sweep(params, pump, grid);
            const std::string csv = io::write_sweep_csv_string(sweep);
            if (tg.out) {
                io::atomic_write_file(*tg.out, csv);
                std::cout << json{{"written", *tg.out},
                                  {"invocation", invocation},
                                  {"config", io::to_json(params)},
                                  {"f_pump_hz", pump.f_pump_hz}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << csv;
            }
        } else if (noise_input->parsed()) {
            json j{{"schema_version", io::schema_version},
                   {"invocation", invocation},
                   {"f_hz", ni.f},
                   {"t_bath_k", ni.t_bath},
                   {"t_in_k", noise::planck_input_noise_k(ni.f, ni.t_bath)}};
            if (ni.f_pump) {
                if (!ni.g_twpa_db || !ni.g_conv_db) {
                    throw std::invalid_argument(
                        "idler accounting needs --g-twpa-db and --g-conv-db");
                }
                const double ratio = db_to_linear(*ni.g_conv_db - *ni.g_twpa_db);
                j["f_idler_hz"] =
                    noise::idler_frequency(Frequency(*ni.f_pump), Frequency(ni.f)).hertz();
                j["t_in_eff_k"] = noise::effective_input_noise_k(ni.f, *ni.f_pump, ni.t_bath, ratio);
            }
            detail::emit(j, ni.out);
        } else if (noise_fit->parsed()) {
            const auto samples = io::read_noise_csv(nf.samples);
            const auto chain = nf.chain
                                   ? io::chain_from_json(detail::load_json_file(*nf.chain))
                                   : noise::ChainConfig{};
            auto groups = detail::group_samples(samples);
            std::vector<detail::PathFit> fits;
            fits.reserve(groups.size());
            for (auto& g : groups) {
                fits.push_back(detail::fit_group(std::move(g), chain, nf.dg_att_db, nf.dt_att_k,
                                                 nf.dt_bkg_k, nf.dg_hemt));
            }
            json results = json::array();
            for (const auto& f : fits) results.push_back(detail::path_fit_to_json(f));
            json j{{"schema_version", io::schema_version},
                   {"invocation", invocation},
                   {"results", results}};

            // Pair Thru and Twpa fits at common frequencies into intrinsic noise.
            json intrinsic = json::array();
            std::vector<noise::PhotonSample> photon_points;
            for (const auto& tw : fits) {
                if (tw.group.path != yfactor::SignalPath::Twpa) continue;
                for (const auto& th_fit : fits) {
                    if (th_fit.group.path != yfactor::SignalPath::Thru) continue;
                    if (std::abs(th_fit.group.f_hz - tw.group.f_hz) > 1e-6 * tw.group.f_hz) continue;
                    const yfactor::AsymValue thru_v{th_fit.t_sys_base_k,
                                                    th_fit.budget.total_lo_k,
                                                    th_fit.budget.total_hi_k};
                    const yfactor::AsymValue twpa_v{tw.t_sys_base_k, tw.budget.total_lo_k,
                                                    tw.budget.total_hi_k};
                    const auto point = yfactor::intrinsic_twpa_report(
                        thru_v, twpa_v, *tw.gains, Frequency(tw.group.f_hz));
                    intrinsic.push_back(io::to_json(point));
                    photon_points.push_back(
                        {point.photons.value, point.photons.err_lo, point.photons.err_hi});
                }
            }
            if (!intrinsic.empty()) {
                j["intrinsic"] = intrinsic;
                const auto avg = noise::weighted_average_photons(photon_points);
                j["photons_avg"] =
                    json{{"n", avg.n}, {"err_lo", avg.err_lo}, {"err_hi", avg.err_hi}};
            }

            if (nf.check_truth) {
                const auto truth =
                    io::truth_from_json(json::parse(io::read_file(*nf.check_truth)));
                json checks = json::array();
                int covered = 0, total = 0;
                bool pass = true;
                for (const auto& f : fits) {
                    const vlab::FrequencyTruth* ft = nullptr;
                    for (const auto& e : truth.per_frequency) {
                        if (std::abs(e.f_hz - f.group.f_hz) <= 1e-6 * f.group.f_hz) ft = &e;
                    }
                    if (!ft) continue;
                    const double z = (f.fit.offset - ft->t_added_true_k) / f.fit.offset_err;
                    const bool cov = std::abs(z) <= 1.0;
                    covered += cov ? 1 : 0;
                    ++total;
                    if (std::abs(z) > 3.0) pass = false;
                    checks.push_back(json{{"f_hz", f.group.f_hz},
                                          {"path", yfactor::to_string(f.group.path)},
                                          {"offset_true_k", ft->t_added_true_k},
                                          {"offset_fit_k", f.fit.offset},
                                          {"offset_err_k", f.fit.offset_err},
                                          {"z", z},
                                          {"covered_1_sigma", cov}});
                }
                j["truth_check"] = json{{"per_fit", checks},
                                        {"coverage_1_sigma",
                                         total ? static_cast<double>(covered) / total : 0.0},
                                        {"pass", pass}};
            }
            detail::emit(j, nf.out);
        } else if (noise_photons->parsed()) {
            const json rep = detail::load_json_file(np.report);
            if (!rep.contains("intrinsic")) {
                throw std::invalid_argument("report has no 'intrinsic' section");
            }
            std::vector<noise::PhotonSample> pts;
            json per = json::array();
            for (const auto& e : rep.at("intrinsic")) {
                const auto& ph = e.at("photons");
                noise::PhotonSample p{ph.at("value").get<double>(), ph.at("err_lo").get<double>(),
                                      ph.at("err_hi").get<double>()};
                pts.push_back(p);
                per.push_back(json{{"f_hz", e.at("f_hz")},
                                   {"n", p.n},
                                   {"err_lo", p.sigma_lo},
                                   {"err_hi", p.sigma_hi}});
            }
            const auto avg = noise::weighted_average_photons(pts);
            detail::emit(json{{"schema_version", io::schema_version},
                              {"invocation", invocation},
                              {"points", per},
                              {"n_avg", avg.n},
                              {"err_lo", avg.err_lo},
                              {"err_hi", avg.err_hi}},
                         np.out);
        } else if (thermal_tau->parsed() || thermal_power->parsed() || thermal_decay->parsed()) {
            const auto cfg = th.config
                                 ? io::thermal_from_json(detail::load_json_file(*th.config))
                                 : thermal::ThermalConfig::paper_default();
            if (thermal_tau->parsed()) {
                detail::emit(json{{"schema_version", io::schema_version},
                                  {"invocation", invocation},
                                  {"t_k", th.t},
                                  {"tau_s", thermal::time_constant(cfg, th.t)},
                                  {"conductance_w_per_k", thermal::weak_link_conductance(cfg, th.t)},
                                  {"heat_capacity_j_per_k", thermal::heat_capacity(cfg, th.t)}},
                             th.out);
            } else if (thermal_power->parsed()) {
                detail::emit(json{{"schema_version", io::schema_version},
                                  {"invocation", invocation},
                                  {"t_hot_k", th.t_hot},
                                  {"t_cold_k", th.t_cold},
                                  {"power_w", thermal::weak_link_power(cfg, th.t_hot, th.t_cold)},
                                  {"heater_w",
                                   thermal::heater_power_for_setpoint(cfg, th.t_hot, th.t_cold)}},
                             th.out);
            } else {
                const auto curve = thermal::simulate_decay(cfg, th.t_start, th.t_flange,
                                                           th.heater_w, th.duration_s, th.dt_s);
                const std::string csv = io::write_decay_csv_string(curve);
                if (th.out) {
                    io::atomic_write_file(*th.out, csv);
                    std::cout << json{{"written", *th.out}, {"invocation", invocation}}.dump()
                              << "\n";
                } else {
                    std::cout << csv;
                }
            }
        } else if (vlab_gen->parsed()) {
            const auto plan = io::plan_from_json(detail::load_json_file(vg.plan));
            auto truth = io::truth_from_json(detail::load_json_file(vg.truth));
            auto errors = io::errors_from_json(detail::load_json_file(vg.errors));
            if (vg.seed) errors.seed = *vg.seed;
            const auto campaign = vlab::simulate_campaign(plan, std::move(truth), errors);
            io::write_noise_csv(campaign.samples, vg.out);
            json meta{{"schema_version", io::schema_version},
                      {"invocation", invocation},
                      {"samples", campaign.samples.size()},
                      {"written", vg.out},
                      {"plan", io::to_json(plan)},
                      {"errors", io::to_json(errors)}};
            if (vg.sidecar) {
                io::atomic_write_file(*vg.sidecar, io::to_json(campaign.sidecar).dump(2) + "\n");
                meta["sidecar"] = *vg.sidecar;
            }
            std::cout << meta.dump(2) << "\n";
        } else if (sparam_report->parsed()) {
            const auto table = io::read_touchstone_subset(sp.in);
            json j = io::sparam_report(table);
            j["invocation"] = invocation;
            detail::emit(j, sp.out);
        }
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"invocation", invocation}}.dump() << "\n";
        return 1;
    }
    return 0;
}

} // namespace cryonoise::cli
