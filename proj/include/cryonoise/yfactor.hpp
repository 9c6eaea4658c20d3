#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cryonoise/noise.hpp"
#include "cryonoise/units.hpp"

namespace cryonoise::yfactor {

enum class SignalPath { Thru, Twpa, DirectHemt };

inline const char* to_string(SignalPath p) {
    switch (p) {
        case SignalPath::Thru: return "Thru";
        case SignalPath::Twpa: return "Twpa";
        case SignalPath::DirectHemt: return "DirectHemt";
    }
    return "?";
}

inline SignalPath path_from_string(const std::string& s) {
    if (s == "Thru") return SignalPath::Thru;
    if (s == "Twpa") return SignalPath::Twpa;
    if (s == "DirectHemt") return SignalPath::DirectHemt;
    throw std::invalid_argument("unknown signal path '" + s + "'");
}

/// One measurement point: bath setpoint, integrated output power and their
/// uncertainties. Twpa points also carry the idler frequency and per-point
/// measured gains (averaged per frequency before fitting).
struct NoiseSample {
    SignalPath path = SignalPath::Thru;
    double f_signal_hz = 0.0;
    std::optional<double> f_idler_hz;
    double t_bath_k = 0.0;
    double t_bath_err_k = 0.0;  // zero marks an exact synthetic point
    double p_out_w = 0.0;
    double p_out_err_db = 0.0;
    std::optional<double> g_twpa_db;
    std::optional<double> g_conv_db;

    void validate() const {
        if (!(f_signal_hz > 0.0)) throw std::invalid_argument("sample: f_signal must be > 0");
        if (t_bath_k < 0.0) throw std::invalid_argument("sample: t_bath must be >= 0");
        if (t_bath_err_k < 0.0) throw std::invalid_argument("sample: t_bath_err must be >= 0");
        if (!(p_out_w > 0.0)) throw std::invalid_argument("sample: p_out must be > 0");
        if (p_out_err_db < 0.0) throw std::invalid_argument("sample: p_out_err_db must be >= 0");
        if (path == SignalPath::Twpa) {
            if (!f_idler_hz || !g_twpa_db || !g_conv_db) {
                throw std::invalid_argument(
                    "sample: Twpa points need f_idler_hz, g_twpa_db and g_conv_db");
            }
        }
    }
};

/// Mean and standard error of the per-point gains across setpoints, in dB.
struct GainSummary {
    double f_signal_hz = 0.0;
    double g_twpa_mean_db = 0.0;
    double g_twpa_err_db = 0.0;
    double g_conv_mean_db = 0.0;
    double g_conv_err_db = 0.0;
    int n = 0;

    double conv_to_signal_ratio() const {
        return db_to_linear(g_conv_mean_db - g_twpa_mean_db);
    }
};

inline GainSummary average_gains(std::span<const NoiseSample> samples) {
    if (samples.empty()) throw std::invalid_argument("average_gains: empty input");
    const double f0 = samples.front().f_signal_hz;
    double st = 0.0, sc = 0.0;
    for (const auto& s : samples) {
        s.validate();
        if (s.path != SignalPath::Twpa) {
            throw std::invalid_argument("average_gains: all samples must be on the Twpa path");
        }
        if (std::abs(s.f_signal_hz - f0) > 1e-6 * f0) {
            throw std::invalid_argument("average_gains: mixed signal frequencies");
        }
        st += *s.g_twpa_db;
        sc += *s.g_conv_db;
    }
    const auto n = static_cast<double>(samples.size());
    GainSummary g;
    g.f_signal_hz = f0;
    g.n = static_cast<int>(samples.size());
    g.g_twpa_mean_db = st / n;
    g.g_conv_mean_db = sc / n;
    if (samples.size() >= 2) {
        double vt = 0.0, vc = 0.0;
        for (const auto& s : samples) {
            vt += (*s.g_twpa_db - g.g_twpa_mean_db) * (*s.g_twpa_db - g.g_twpa_mean_db);
            vc += (*s.g_conv_db - g.g_conv_mean_db) * (*s.g_conv_db - g.g_conv_mean_db);
        }
        g.g_twpa_err_db = std::sqrt(vt / (n - 1.0) / n);  // standard error of the mean
        g.g_conv_err_db = std::sqrt(vc / (n - 1.0) / n);
    }
    return g;
}

struct FitPoint {
    double x = 0.0;   // output power, W
    double sx = 0.0;
    double y = 0.0;   // input noise temperature, K
    double sy = 0.0;
};

/// Maps samples to weighted fit points. The y-error combines the thermometer
/// error propagated through the quantum correction with, on the Twpa path,
/// the gain-ratio error of the averaged gains (quadrature). The dB power
/// error maps symmetrically to sx = p (10^(err/10) - 1).
inline std::vector<FitPoint> build_fit_points(std::span<const NoiseSample> samples,
                                              const GainSummary* gains = nullptr) {
    if (samples.empty()) throw std::invalid_argument("build_fit_points: empty input");
    std::vector<FitPoint> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples) {
        s.validate();
        FitPoint p;
        p.x = s.p_out_w;
        p.sx = s.p_out_w * (db_to_linear(s.p_out_err_db) - 1.0);
        if (s.path == SignalPath::Twpa) {
            if (!gains) throw std::invalid_argument("build_fit_points: Twpa path needs gains");
            const double ratio = gains->conv_to_signal_ratio();
            const double ti = noise::planck_input_noise_k(*s.f_idler_hz, s.t_bath_k);
            p.y = noise::planck_input_noise_k(s.f_signal_hz, s.t_bath_k) + ratio * ti;
            const double dth = (noise::planck_input_noise_slope(s.f_signal_hz, s.t_bath_k) +
                                ratio * noise::planck_input_noise_slope(*s.f_idler_hz, s.t_bath_k)) *
                               s.t_bath_err_k;
            const double sigma_ratio =
                ratio * std::numbers::ln10 / 10.0 *
                std::hypot(gains->g_conv_err_db, gains->g_twpa_err_db);
            p.sy = std::hypot(dth, ti * sigma_ratio);
        } else {
            p.y = noise::planck_input_noise_k(s.f_signal_hz, s.t_bath_k);
            p.sy = noise::planck_input_noise_slope(s.f_signal_hz, s.t_bath_k) * s.t_bath_err_k;
        }
        pts.push_back(p);
    }
    return pts;
}

/// Result of the straight-line fit T_in = alpha P_out - offset.
struct FitReport {
    double alpha = 0.0;   // K/W
    double offset = 0.0;  // K (added or excess noise, by path)
    double alpha_err = 0.0;
    double offset_err = 0.0;
    double alpha_err_scaled = 0.0;   // multiplied by sqrt(reduced chi2)
    double offset_err_scaled = 0.0;
    std::array<std::array<double, 2>, 2> covariance{};  // (alpha, offset)
    int n_points = 0;
    double reduced_chi2 = 0.0;
};

/// Weighted errors-in-variables straight line through (x +- sx, y +- sy):
/// York's exact solution of the effective-variance objective
/// sum w_i (y_i - alpha x_i - b)^2 with w_i = 1/(sy_i^2 + alpha^2 sx_i^2),
/// iterated until |d alpha| / alpha < 1e-10. Plain weighted least squares at
/// fixed weights dilutes the slope when sx dominates; the York update keeps
/// the estimate consistent at the instrument noise levels used here.
inline FitReport fit_yfactor(std::span<const FitPoint> points) {
    const std::size_t n = points.size();
    if (n < 3) throw std::invalid_argument("fit_yfactor: need at least 3 points");

    double xmin = points[0].x, xmax = points[0].x;
    bool any_sigma = false;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        if (p.sx > 0.0 || p.sy > 0.0) any_sigma = true;
    }
    if (xmax - xmin <= 0.0) {
        throw std::invalid_argument("fit_yfactor: all abscissae equal, line is undetermined");
    }

    std::vector<double> w(n, 1.0);
    const auto weights_for = [&](double b) {
        for (std::size_t i = 0; i < n; ++i) {
            const double den = points[i].sy * points[i].sy + b * b * points[i].sx * points[i].sx;
            w[i] = den > 0.0 ? 1.0 / den : 0.0;
        }
        if (!any_sigma) {
            for (auto& wi : w) wi = 1.0;  // exact synthetic data
        } else {
            // Points declared exact get the largest finite weight present.
            double wmax = 0.0;
            for (double wi : w) wmax = std::max(wmax, wi);
            for (auto& wi : w) {
                if (wi == 0.0) wi = wmax;
            }
        }
    };

    // Unweighted slope as the starting value.
    double b;
    {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& p : points) {
            sx += p.x;
            sy += p.y;
            sxx += p.x * p.x;
            sxy += p.x * p.y;
        }
        const double d = n * sxx - sx * sx;
        b = (n * sxy - sx * sy) / d;
    }

    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        weights_for(b);
        double sw = 0.0, swx = 0.0, swy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += w[i];
            swx += w[i] * points[i].x;
            swy += w[i] * points[i].y;
        }
        const double xbar = swx / sw, ybar = swy / sw;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = points[i].x - xbar;
            const double v = points[i].y - ybar;
            const double beta =
                w[i] * (points[i].sy * points[i].sy * u + b * points[i].sx * points[i].sx * v);
            num += w[i] * beta * v;
            den += w[i] * beta * u;
        }
        double b_new;
        if (!any_sigma) {
            double swxx = 0.0, swxy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                swxx += w[i] * points[i].x * points[i].x;
                swxy += w[i] * points[i].x * points[i].y;
            }
            b_new = (sw * swxy - swx * swy) / (sw * swxx - swx * swx);
        } else {
            if (den == 0.0) throw std::runtime_error("fit_yfactor: degenerate normal equations");
            b_new = num / den;
        }
        const double rel = std::abs(b_new - b) / std::max(std::abs(b_new), 1e-300);
        b = b_new;
        if (rel < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw std::runtime_error("fit_yfactor: no convergence after 100 iterations");

    weights_for(b);
    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swx += w[i] * points[i].x;
        swy += w[i] * points[i].y;
    }
    const double xbar = swx / sw, ybar = swy / sw;
    const double a = ybar - b * xbar;

    // Parameter errors from York's adjusted points.
    double xadj_bar = 0.0;
    {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = points[i].x - xbar;
            const double v = points[i].y - ybar;
            const double beta =
                w[i] * (points[i].sy * points[i].sy * u + b * points[i].sx * points[i].sx * v);
            s += w[i] * (xbar + beta);
        }
        xadj_bar = s / sw;
    }
    double su2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = points[i].x - xbar;
        const double v = points[i].y - ybar;
        const double beta =
            w[i] * (points[i].sy * points[i].sy * u + b * points[i].sx * points[i].sx * v);
        const double ustar = xbar + beta - xadj_bar;
        su2 += w[i] * ustar * ustar;
    }
    const double var_b = su2 > 0.0 ? 1.0 / su2 : 0.0;
    const double var_a = 1.0 / sw + xadj_bar * xadj_bar * var_b;
    const double cov_ab = -xadj_bar * var_b;

    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = points[i].y - (a + b * points[i].x);
        chi2 += w[i] * r * r;
    }
    const double red = chi2 / static_cast<double>(n - 2);

    FitReport rep;
    rep.alpha = b;
    rep.offset = -a;
    rep.alpha_err = std::sqrt(var_b);
    rep.offset_err = std::sqrt(var_a);
    const double scale = std::sqrt(std::max(red, 0.0));
    rep.alpha_err_scaled = rep.alpha_err * scale;
    rep.offset_err_scaled = rep.offset_err * scale;
    rep.covariance = {{{var_b, -cov_ab}, {-cov_ab, var_a}}};  // offset = -a flips the cross sign
    rep.n_points = static_cast<int>(n);
    rep.reduced_chi2 = red;
    return rep;
}

inline constexpr double reference_bath_k = 0.010;  // coldest-stage reference bath

/// System noise at the reference bath: fit offset plus the vacuum-side input
/// noise. Thru/DirectHemt variant.
inline double system_noise_at_base(const FitReport& rep, Frequency f) {
    return rep.offset + noise::planck_input_noise_k(f.hertz(), reference_bath_k);
}

/// Twpa variant: the input noise includes the idler band at the averaged
/// gain ratio.
inline double system_noise_at_base(const FitReport& rep, Frequency f_signal, Frequency f_idler,
                                   const GainSummary& gains) {
    const double ratio = gains.conv_to_signal_ratio();
    return rep.offset + noise::planck_input_noise_k(f_signal.hertz(), reference_bath_k) +
           ratio * noise::planck_input_noise_k(f_idler.hertz(), reference_bath_k);
}

/// Insertion-loss-corrected system noise:
/// g_att * T_added - T_bkg/G_hemt - g_att * t_att + t_in.
/// With g_att = 1, t_att = 0 and negligible background this is
/// system_noise_at_base.
inline double insertion_loss_correction(const FitReport& rep, double g_att, double t_att_k,
                                        double t_in_k,
                                        const noise::ChainConfig* chain = nullptr) {
    if (!(g_att > 0.0) || g_att > 1.0) {
        throw std::invalid_argument("insertion_loss_correction: g_att must be in (0, 1]");
    }
    if (t_att_k < 0.0) throw std::invalid_argument("insertion_loss_correction: t_att must be >= 0");
    const double bkg = chain ? chain->t_bkg_k / chain->g_hemt : 0.0;
    return g_att * rep.offset - bkg - g_att * t_att_k + t_in_k;
}

/// One-sided bounds for the systematic error budget. Loss corrections can
/// only lower the inferred noise, so their bounds are non-positive.
struct BudgetBounds {
    double dg_att_db = 0.0;  // <= 0
    double dt_att_k = 0.0;   // <= 0
    double dt_bkg_k = 0.0;   // >= 0
    double dg_hemt = 0.0;    // >= 0, linear

    void validate() const {
        if (dg_att_db > 0.0 || dt_att_k > 0.0) {
            throw std::invalid_argument("budget bounds: loss terms must be <= 0");
        }
        if (dt_bkg_k < 0.0 || dg_hemt < 0.0) {
            throw std::invalid_argument("budget bounds: background terms must be >= 0");
        }
    }
};

struct BudgetTerm {
    std::string name;
    double lo_k = 0.0;  // magnitude of the negative-side contribution
    double hi_k = 0.0;
};

struct ErrorBudget {
    std::vector<BudgetTerm> terms;
    double total_lo_k = 0.0;
    double total_hi_k = 0.0;
};

/// Term-wise absolute-value error budget of the corrected system noise. The
/// fit-offset and background terms are symmetric; the insertion-loss terms
/// are one-sided (they can only lower the result).
inline ErrorBudget error_budget(const FitReport& rep, const noise::ChainConfig& chain,
                                const BudgetBounds& bounds) {
    chain.validate();
    bounds.validate();
    const double g_att = chain.g_att;
    const double dg_att = 1.0 - db_to_linear(bounds.dg_att_db);  // magnitude of the gain drop

    ErrorBudget budget;
    const auto add = [&budget](std::string name, double lo, double hi) {
        budget.terms.push_back({std::move(name), lo, hi});
        budget.total_lo_k += lo;
        budget.total_hi_k += hi;
    };
    const double fit = g_att * rep.offset_err;
    add("fit_offset", fit, fit);
    add("insertion_loss_gain", std::abs(rep.offset) * dg_att + chain.t_att_k * dg_att, 0.0);
    add("insertion_loss_temp", g_att * std::abs(bounds.dt_att_k), 0.0);
    const double bkg = bounds.dt_bkg_k / chain.g_hemt;
    add("background", bkg, bkg);
    const double hemt = chain.t_bkg_k * bounds.dg_hemt / (chain.g_hemt * chain.g_hemt);
    add("hemt_gain", hemt, hemt);
    return budget;
}

struct AsymValue {
    double value = 0.0;
    double err_lo = 0.0;
    double err_hi = 0.0;
};

struct IntrinsicPoint {
    double f_hz = 0.0;
    AsymValue t_twpa_k;
    AsymValue photons;
};

/// Intrinsic preamplifier noise from the two paths' system noises at the same
/// frequency: t = t_twpa_path - t_thru_path / g. Error bars add linearly
/// (worst case), including the gain-error term of the subtracted piece.
inline IntrinsicPoint intrinsic_twpa_report(const AsymValue& t_sys_thru,
                                            const AsymValue& t_sys_twpa,
                                            const GainSummary& gains, Frequency f) {
    if (std::abs(gains.f_signal_hz - f.hertz()) > 1e-6 * f.hertz()) {
        throw std::invalid_argument("intrinsic_twpa_report: gain summary frequency mismatch");
    }
    const double g = db_to_linear(gains.g_twpa_mean_db);
    const double dg = g * std::numbers::ln10 / 10.0 * gains.g_twpa_err_db;
    const double gain_term = t_sys_thru.value / (g * g) * dg;

    IntrinsicPoint out;
    out.f_hz = f.hertz();
    out.t_twpa_k.value = t_sys_twpa.value - t_sys_thru.value / g;
    out.t_twpa_k.err_hi = t_sys_twpa.err_hi + t_sys_thru.err_lo / g + gain_term;
    out.t_twpa_k.err_lo = t_sys_twpa.err_lo + t_sys_thru.err_hi / g + gain_term;
    const double per_kelvin = boltzmann_constant / (planck_constant * f.hertz());
    out.photons.value = out.t_twpa_k.value * per_kelvin;
    out.photons.err_lo = out.t_twpa_k.err_lo * per_kelvin;
    out.photons.err_hi = out.t_twpa_k.err_hi * per_kelvin;
    return out;
}

} // namespace cryonoise::yfactor
