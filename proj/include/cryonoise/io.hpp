#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cryonoise/noise.hpp"
#include "cryonoise/thermal.hpp"
#include "cryonoise/twpa.hpp"
#include "cryonoise/vlab.hpp"
#include "cryonoise/yfactor.hpp"

namespace cryonoise::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// primitives

/// Serializes a double with 17 significant digits: lossless round trip,
/// deterministic text.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes content to a temporary file in the destination directory, then
/// renames it into place.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw io_error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void check_schema(const json& j, const std::string& what) {
    if (!j.contains("schema_version")) {
        throw io_error(what + ": missing schema_version");
    }
    const int v = j.at("schema_version").get<int>();
    if (v != schema_version) {
        throw io_error(what + ": unsupported schema_version " + std::to_string(v) +
                       " (this build reads version " + std::to_string(schema_version) + ")");
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline double parse_double(const std::string& s, int line_no, const char* column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw io_error("line " + std::to_string(line_no) + ": cannot parse column '" + column +
                       "' from '" + s + "'");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// noise-sample CSV

inline constexpr const char* noise_csv_header =
    "path,f_signal_hz,f_idler_hz,t_bath_k,t_bath_err_k,p_out_w,p_out_err_db,g_twpa_db,g_conv_db";

inline std::string write_noise_csv_string(std::span<const yfactor::NoiseSample> samples) {
    std::string out(noise_csv_header);
    out += '\n';
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& s : samples) {
        out += yfactor::to_string(s.path);
        out += ',';
        out += format_double(s.f_signal_hz);
        out += ',';
        out += opt(s.f_idler_hz);
        out += ',';
        out += format_double(s.t_bath_k);
        out += ',';
        out += format_double(s.t_bath_err_k);
        out += ',';
        out += format_double(s.p_out_w);
        out += ',';
        out += format_double(s.p_out_err_db);
        out += ',';
        out += opt(s.g_twpa_db);
        out += ',';
        out += opt(s.g_conv_db);
        out += '\n';
    }
    return out;
}

inline void write_noise_csv(std::span<const yfactor::NoiseSample> samples,
                            const std::filesystem::path& path) {
    atomic_write_file(path, write_noise_csv_string(samples));
}

inline std::vector<yfactor::NoiseSample> read_noise_csv_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty noise CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != noise_csv_header) {
        throw io_error("unrecognized noise CSV header; expected '" +
                       std::string(noise_csv_header) + "'");
    }
    std::vector<yfactor::NoiseSample> samples;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 9) {
            throw io_error("line " + std::to_string(line_no) + ": expected 9 columns, got " +
                           std::to_string(f.size()));
        }
        yfactor::NoiseSample s;
        try {
            s.path = yfactor::path_from_string(f[0]);
        } catch (const std::exception& e) {
            throw io_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        s.f_signal_hz = detail::parse_double(f[1], line_no, "f_signal_hz");
        if (!f[2].empty()) s.f_idler_hz = detail::parse_double(f[2], line_no, "f_idler_hz");
        s.t_bath_k = detail::parse_double(f[3], line_no, "t_bath_k");
        s.t_bath_err_k = detail::parse_double(f[4], line_no, "t_bath_err_k");
        s.p_out_w = detail::parse_double(f[5], line_no, "p_out_w");
        s.p_out_err_db = detail::parse_double(f[6], line_no, "p_out_err_db");
        if (!f[7].empty()) s.g_twpa_db = detail::parse_double(f[7], line_no, "g_twpa_db");
        if (!f[8].empty()) s.g_conv_db = detail::parse_double(f[8], line_no, "g_conv_db");
        if (s.t_bath_k >= 400.0) {
            throw io_error("line " + std::to_string(line_no) +
                           ": t_bath_k >= 400 K fails the unit sanity check (kelvin expected)");
        }
        if (s.path == yfactor::SignalPath::Twpa) {
            const char* missing = !s.f_idler_hz  ? "f_idler_hz"
                                  : !s.g_twpa_db ? "g_twpa_db"
                                  : !s.g_conv_db ? "g_conv_db"
                                                 : nullptr;
            if (missing) {
                throw io_error("line " + std::to_string(line_no) + ": Twpa row is missing column '" +
                               missing + "'");
            }
        }
        try {
            s.validate();
        } catch (const std::exception& e) {
            throw io_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        samples.push_back(s);
    }
    return samples;
}

inline std::vector<yfactor::NoiseSample> read_noise_csv(const std::filesystem::path& path) {
    return read_noise_csv_string(read_file(path));
}

// ---------------------------------------------------------------------------
// sweep / decay CSV

inline std::string write_sweep_csv_string(std::span<const twpa::SweepPoint> sweep) {
    std::string out = "f_hz,gain_db,loss_db,conv_gain_db\n";
    for (const auto& p : sweep) {
        out += format_double(p.f_hz) + ',' + format_double(p.gain_db) + ',' +
               format_double(p.loss_db) + ',' + format_double(p.conv_gain_db) + '\n';
    }
    return out;
}

inline std::string write_decay_csv_string(const thermal::DecayCurve& c) {
    std::string out = "time_s,temperature_k\n";
    for (std::size_t i = 0; i < c.time_s.size(); ++i) {
        out += format_double(c.time_s[i]) + ',' + format_double(c.temperature_k[i]) + '\n';
    }
    return out;
}

inline thermal::DecayCurve read_decay_csv_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty decay CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,temperature_k") throw io_error("unrecognized decay CSV header");
    thermal::DecayCurve c;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 2) {
            throw io_error("line " + std::to_string(line_no) + ": expected 2 columns");
        }
        c.time_s.push_back(detail::parse_double(f[0], line_no, "time_s"));
        c.temperature_k.push_back(detail::parse_double(f[1], line_no, "temperature_k"));
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// config JSON

inline json to_json(const noise::GainTable& t) {
    return json{{"f_hz", t.f_hz}, {"db", t.db}};
}

inline noise::GainTable gain_table_from_json(const json& j) {
    noise::GainTable t;
    t.f_hz = j.at("f_hz").get<std::vector<double>>();
    t.db = j.at("db").get<std::vector<double>>();
    t.validate();
    return t;
}

inline json to_json(const noise::ChainConfig& c) {
    json j{{"schema_version", schema_version},
           {"g_hemt_db", linear_to_db(c.g_hemt)},
           {"t_hemt_k", c.t_hemt_k},
           {"t_bkg_k", c.t_bkg_k},
           {"g_att", c.g_att},
           {"t_att_k", c.t_att_k},
           {"bandwidth_hz", c.bandwidth_hz}};
    if (c.t_twpa_k) j["t_twpa_k"] = *c.t_twpa_k;
    if (c.twpa_gain_db) j["twpa_gain_db"] = to_json(*c.twpa_gain_db);
    if (c.conv_gain_db) j["conv_gain_db"] = to_json(*c.conv_gain_db);
    return j;
}

inline noise::ChainConfig chain_from_json(const json& j) {
    check_schema(j, "chain config");
    noise::ChainConfig c;
    c.g_hemt = db_to_linear(j.at("g_hemt_db").get<double>());
    c.t_hemt_k = j.at("t_hemt_k").get<double>();
    c.t_bkg_k = j.at("t_bkg_k").get<double>();
    c.g_att = j.value("g_att", 1.0);
    c.t_att_k = j.value("t_att_k", 0.0);
    c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("t_twpa_k")) c.t_twpa_k = j.at("t_twpa_k").get<double>();
    if (j.contains("twpa_gain_db")) c.twpa_gain_db = gain_table_from_json(j.at("twpa_gain_db"));
    if (j.contains("conv_gain_db")) c.conv_gain_db = gain_table_from_json(j.at("conv_gain_db"));
    c.validate();
    return c;
}

inline json to_json(const twpa::TwpaParams& p) {
    return json{{"schema_version", schema_version},
                {"i_c", p.i_c},
                {"omega_j", p.omega_j},
                {"n_cells", p.n_cells},
                {"junctions_per_cell", p.junctions_per_cell},
                {"l_cell", p.l_cell},
                {"c_cell", p.c_cell},
                {"tan_delta", p.tan_delta},
                {"i_p_ratio", p.i_p_ratio},
                {"r_mirror", p.r_mirror},
                {"t_mirror", p.t_mirror()},
                {"loss_participation", p.loss_participation}};
}

inline twpa::TwpaParams twpa_from_json(const json& j) {
    check_schema(j, "twpa config");
    twpa::TwpaParams p;
    p.i_c = j.value("i_c", p.i_c);
    p.omega_j = j.at("omega_j").get<double>();
    p.n_cells = j.at("n_cells").get<int>();
    p.junctions_per_cell = j.at("junctions_per_cell").get<int>();
    p.l_cell = j.at("l_cell").get<double>();
    p.c_cell = j.at("c_cell").get<double>();
    p.tan_delta = j.at("tan_delta").get<double>();
    p.i_p_ratio = j.at("i_p_ratio").get<double>();
    p.r_mirror = j.at("r_mirror").get<double>();
    p.loss_participation = j.value("loss_participation", 1.0);
    if (j.contains("t_mirror")) {
        const double t = j.at("t_mirror").get<double>();
        if (std::abs(t * t + p.r_mirror * p.r_mirror - 1.0) > 1e-12) {
            throw io_error("twpa config: t_mirror^2 + r_mirror^2 != 1");
        }
    }
    p.validate();
    return p;
}

inline json to_json(const thermal::ThermalConfig& c) {
    return json{{"schema_version", schema_version},
                {"mass_kg", c.mass_kg},
                {"screw_count", c.screw_count},
                {"screw_area_over_length_m", c.screw_area_over_length_m},
                {"bead_area_over_length_m", c.bead_area_over_length_m},
                {"q_steel_1k_w_per_cm", c.q_steel_1k_w_per_cm},
                {"q_alox_1k_w_per_cm", c.q_alox_1k_w_per_cm},
                {"n_steel", c.n_steel},
                {"n_alox", c.n_alox},
                {"anchor_t_hot_k", c.anchor_t_hot_k},
                {"anchor_t_cold_k", c.anchor_t_cold_k},
                {"gamma_j_per_kg_k2", c.gamma_j_per_kg_k2},
                {"beta_j_per_kg_k4", c.beta_j_per_kg_k4}};
}

inline thermal::ThermalConfig thermal_from_json(const json& j) {
    check_schema(j, "thermal config");
    thermal::ThermalConfig c;
    c.mass_kg = j.at("mass_kg").get<double>();
    c.screw_count = j.at("screw_count").get<int>();
    c.screw_area_over_length_m = j.at("screw_area_over_length_m").get<double>();
    c.bead_area_over_length_m = j.at("bead_area_over_length_m").get<double>();
    c.q_steel_1k_w_per_cm = j.value("q_steel_1k_w_per_cm", c.q_steel_1k_w_per_cm);
    c.q_alox_1k_w_per_cm = j.value("q_alox_1k_w_per_cm", c.q_alox_1k_w_per_cm);
    c.n_steel = j.value("n_steel", c.n_steel);
    c.n_alox = j.value("n_alox", c.n_alox);
    c.anchor_t_hot_k = j.value("anchor_t_hot_k", c.anchor_t_hot_k);
    c.anchor_t_cold_k = j.value("anchor_t_cold_k", c.anchor_t_cold_k);
    c.gamma_j_per_kg_k2 = j.value("gamma_j_per_kg_k2", c.gamma_j_per_kg_k2);
    c.beta_j_per_kg_k4 = j.value("beta_j_per_kg_k4", c.beta_j_per_kg_k4);
    c.validate();
    return c;
}

inline json to_json(const vlab::CampaignPlan& p) {
    json j{{"schema_version", schema_version},
           {"path", yfactor::to_string(p.path)},
           {"setpoints_k", p.setpoints_k},
           {"f_signal_hz", p.f_signal_hz},
           {"span_hz", p.span_hz},
           {"rbw_hz", p.rbw_hz},
           {"probe_power_w", p.probe_power_w},
           {"wait_tau_multiple", p.wait_tau_multiple}};
    if (p.f_pump_hz) j["f_pump_hz"] = *p.f_pump_hz;
    return j;
}

inline vlab::CampaignPlan plan_from_json(const json& j) {
    check_schema(j, "campaign plan");
    vlab::CampaignPlan p;
    p.path = yfactor::path_from_string(j.at("path").get<std::string>());
    p.setpoints_k = j.at("setpoints_k").get<std::vector<double>>();
    p.f_signal_hz = j.at("f_signal_hz").get<std::vector<double>>();
    if (j.contains("f_pump_hz")) p.f_pump_hz = j.at("f_pump_hz").get<double>();
    p.span_hz = j.value("span_hz", p.span_hz);
    p.rbw_hz = j.value("rbw_hz", p.rbw_hz);
    p.probe_power_w = j.value("probe_power_w", p.probe_power_w);
    p.wait_tau_multiple = j.value("wait_tau_multiple", p.wait_tau_multiple);
    p.validate();
    return p;
}

inline json to_json(const vlab::InstrumentErrors& e) {
    return json{{"schema_version", schema_version},
                {"thermometer_sigma_k", e.thermometer_sigma_k},
                {"analyzer_sigma_db", e.analyzer_sigma_db},
                {"switch_repeatability_db", e.switch_repeatability_db},
                {"switch_threshold_hz", e.switch_threshold_hz},
                {"analyzer_noise_floor_w_per_hz", e.analyzer_noise_floor_w_per_hz},
                {"seed", e.seed}};
}

inline vlab::InstrumentErrors errors_from_json(const json& j) {
    check_schema(j, "instrument errors");
    vlab::InstrumentErrors e;
    e.thermometer_sigma_k = j.at("thermometer_sigma_k").get<double>();
    e.analyzer_sigma_db = j.at("analyzer_sigma_db").get<double>();
    e.switch_repeatability_db = j.value("switch_repeatability_db", 0.0);
    e.switch_threshold_hz = j.value("switch_threshold_hz", 6e9);
    e.analyzer_noise_floor_w_per_hz = j.value("analyzer_noise_floor_w_per_hz", 1e-22);
    e.seed = j.value("seed", std::uint64_t{0});
    e.validate();
    return e;
}

inline json to_json(const vlab::CampaignTruth& t) {
    json j{{"schema_version", schema_version},
           {"chain", to_json(t.chain)},
           {"g_tot_db", t.g_tot_db}};
    if (t.twpa) j["twpa"] = to_json(*t.twpa);
    json per = json::array();
    for (const auto& f : t.per_frequency) {
        json e{{"f_hz", f.f_hz},
               {"t_added_true_k", f.t_added_true_k},
               {"t_sys_true_k", f.t_sys_true_k},
               {"alpha_true_k_per_w", f.alpha_true_k_per_w},
               {"switch_offset_db", f.switch_offset_db},
               {"snr_ok", f.snr_ok}};
        if (f.f_idler_hz > 0.0) {
            e["f_idler_hz"] = f.f_idler_hz;
            e["g_twpa_db"] = f.g_twpa_db;
            e["g_conv_db"] = f.g_conv_db;
        }
        per.push_back(e);
    }
    j["per_frequency"] = per;
    return j;
}

inline vlab::CampaignTruth truth_from_json(const json& j) {
    check_schema(j, "campaign truth");
    vlab::CampaignTruth t;
    t.chain = chain_from_json(j.at("chain"));
    t.g_tot_db = j.at("g_tot_db").get<double>();
    if (j.contains("twpa")) t.twpa = twpa_from_json(j.at("twpa"));
    if (j.contains("per_frequency")) {
        for (const auto& e : j.at("per_frequency")) {
            vlab::FrequencyTruth f;
            f.f_hz = e.at("f_hz").get<double>();
            f.t_added_true_k = e.at("t_added_true_k").get<double>();
            f.t_sys_true_k = e.at("t_sys_true_k").get<double>();
            f.alpha_true_k_per_w = e.at("alpha_true_k_per_w").get<double>();
            f.switch_offset_db = e.value("switch_offset_db", 0.0);
            if (e.contains("f_idler_hz")) {
                f.f_idler_hz = e.at("f_idler_hz").get<double>();
                f.g_twpa_db = e.at("g_twpa_db").get<double>();
                f.g_conv_db = e.at("g_conv_db").get<double>();
            }
            if (e.contains("snr_ok")) f.snr_ok = e.at("snr_ok").get<std::vector<bool>>();
            t.per_frequency.push_back(std::move(f));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// report JSON

inline json to_json(const yfactor::FitReport& r) {
    return json{{"alpha_k_per_w", r.alpha},
                {"offset_k", r.offset},
                {"alpha_err", r.alpha_err},
                {"offset_err", r.offset_err},
                {"alpha_err_scaled", r.alpha_err_scaled},
                {"offset_err_scaled", r.offset_err_scaled},
                {"covariance", {{r.covariance[0][0], r.covariance[0][1]},
                                {r.covariance[1][0], r.covariance[1][1]}}},
                {"n_points", r.n_points},
                {"reduced_chi2", r.reduced_chi2}};
}

inline json to_json(const yfactor::GainSummary& g) {
    return json{{"f_signal_hz", g.f_signal_hz},
                {"g_twpa_mean_db", g.g_twpa_mean_db},
                {"g_twpa_err_db", g.g_twpa_err_db},
                {"g_conv_mean_db", g.g_conv_mean_db},
                {"g_conv_err_db", g.g_conv_err_db},
                {"n", g.n}};
}

inline json to_json(const yfactor::ErrorBudget& b) {
    json terms = json::array();
    for (const auto& t : b.terms) {
        terms.push_back(json{{"name", t.name}, {"lo_k", t.lo_k}, {"hi_k", t.hi_k}});
    }
    return json{{"terms", terms}, {"total_lo_k", b.total_lo_k}, {"total_hi_k", b.total_hi_k}};
}

inline json to_json(const yfactor::AsymValue& v) {
    return json{{"value", v.value}, {"err_lo", v.err_lo}, {"err_hi", v.err_hi}};
}

inline json to_json(const yfactor::IntrinsicPoint& p) {
    return json{{"f_hz", p.f_hz},
                {"t_twpa_k", to_json(p.t_twpa_k)},
                {"photons", to_json(p.photons)}};
}

// ---------------------------------------------------------------------------
// touchstone subset (2-port, HZ/KHZ/MHZ/GHZ, S, RI or DB)

struct SParamTable {
    std::vector<double> f_hz;
    std::vector<std::array<std::complex<double>, 4>> s;  // S11 S21 S12 S22
    double z0_ohm = 50.0;
};

inline SParamTable read_touchstone_subset_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    double unit = 1.0;
    bool db_format = false;
    bool option_seen = false;
    SParamTable table;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto bang = line.find('!');
        if (bang != std::string::npos) line = line.substr(0, bang);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "#") {
            std::string unit_s, param, fmt, r;
            double z0 = 50.0;
            if (!(ls >> unit_s >> param >> fmt >> r >> z0)) {
                throw io_error("line " + std::to_string(line_no) + ": malformed option line");
            }
            for (auto& c : unit_s) c = static_cast<char>(std::toupper(c));
            for (auto& c : fmt) c = static_cast<char>(std::toupper(c));
            for (auto& c : param) c = static_cast<char>(std::toupper(c));
            if (unit_s == "HZ") unit = 1.0;
            else if (unit_s == "KHZ") unit = 1e3;
            else if (unit_s == "MHZ") unit = 1e6;
            else if (unit_s == "GHZ") unit = 1e9;
            else throw io_error("touchstone: unsupported frequency unit '" + unit_s + "'");
            if (param != "S") throw io_error("touchstone: only S-parameters are supported, got '" + param + "'");
            if (fmt == "RI") db_format = false;
            else if (fmt == "DB") db_format = true;
            else throw io_error("touchstone: unsupported format '" + fmt + "' (RI and DB only)");
            table.z0_ohm = z0;
            option_seen = true;
            continue;
        }
        if (!option_seen) {
            throw io_error("touchstone: data before the '#' option line");
        }
        std::vector<double> vals;
        vals.push_back(detail::parse_double(tok, line_no, "frequency"));
        double v = 0.0;
        while (ls >> v) vals.push_back(v);
        if (vals.size() != 9) {
            throw io_error("line " + std::to_string(line_no) +
                           ": expected 9 values for a 2-port row, got " +
                           std::to_string(vals.size()));
        }
        const double f = vals[0] * unit;
        if (!table.f_hz.empty() && f <= table.f_hz.back()) {
            throw io_error("line " + std::to_string(line_no) +
                           ": frequency grid must be strictly increasing");
        }
        std::array<std::complex<double>, 4> row;
        for (int i = 0; i < 4; ++i) {
            const double a = vals[1 + 2 * i];
            const double b = vals[2 + 2 * i];
            if (db_format) {
                const double mag = std::pow(10.0, a / 20.0);
                const double ph = b * std::numbers::pi / 180.0;
                row[i] = std::polar(mag, ph);
            } else {
                row[i] = {a, b};
            }
            if (!std::isfinite(row[i].real()) || !std::isfinite(row[i].imag())) {
                throw io_error("line " + std::to_string(line_no) + ": non-finite S-parameter");
            }
        }
        table.f_hz.push_back(f);
        table.s.push_back(row);
    }
    if (table.f_hz.empty()) throw io_error("touchstone: no data rows");
    return table;
}

inline SParamTable read_touchstone_subset(const std::filesystem::path& path) {
    return read_touchstone_subset_string(read_file(path));
}

/// Attenuation flatness and port-match summary of a 2-port table.
inline json sparam_report(const SParamTable& t) {
    std::vector<double> att;
    att.reserve(t.s.size());
    double s11_max = -1e300, s22_max = -1e300;
    for (const auto& row : t.s) {
        att.push_back(-20.0 * std::log10(std::abs(row[1])));  // S21
        s11_max = std::max(s11_max, 20.0 * std::log10(std::abs(row[0])));
        s22_max = std::max(s22_max, 20.0 * std::log10(std::abs(row[3])));
    }
    const auto n = static_cast<double>(att.size());
    double sum = 0.0;
    double att_min = 1e300, att_max = -1e300;
    for (double a : att) {
        sum += a;
        att_min = std::min(att_min, a);
        att_max = std::max(att_max, a);
    }
    const double mean = sum / n;
    double var = 0.0;
    for (double a : att) var += (a - mean) * (a - mean);
    var = n > 1 ? var / (n - 1.0) : 0.0;
    return json{{"schema_version", schema_version},
                {"n_points", t.s.size()},
                {"f_min_hz", t.f_hz.front()},
                {"f_max_hz", t.f_hz.back()},
                {"attenuation_mean_db", mean},
                {"attenuation_std_db", std::sqrt(var)},
                {"attenuation_min_db", att_min},
                {"attenuation_max_db", att_max},
                {"flatness_db", att_max - att_min},
                {"s11_max_db", s11_max},
                {"s22_max_db", s22_max},
                {"reference_impedance_ohm", t.z0_ohm}};
}

} // namespace cryonoise::io
