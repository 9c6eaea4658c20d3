#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cryonoise/ode.hpp"
#include "cryonoise/twpa.hpp"

using namespace cryonoise;
using namespace cryonoise::twpa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Closed-form reference for the envelope pair, independent of the ODE path:
// in the frame b1 = a_s e^{-i dk x / 2}, b2 = conj(a_i) e^{+i dk x / 2} the
// system has constant coefficients and exp(Mx) follows from the 2x2 identity
// exp(Mx) = e^{mu x} (cosh(nu x) I + sinh(nu x)/nu (M - mu I)).
CmeResult cme_reference(const CmeCoefficients& c, double x) {
    using cd = std::complex<double>;
    const cd i(0.0, 1.0);
    const cd p = cd(-c.alpha_s, 0.0) - i * (c.dk / 2.0);
    const cd q = cd(-c.alpha_i, 0.0) + i * (c.dk / 2.0);
    const cd mu = (p + q) / 2.0;
    const cd nu = std::sqrt((p - q) * (p - q) / 4.0 + cd(c.g_s * c.g_i, 0.0));
    cd ch, shn;  // cosh(nu x), sinh(nu x)/nu
    if (std::abs(nu) * x < 1e-8) {
        ch = 1.0 + nu * nu * x * x / 2.0;
        shn = x * (1.0 + nu * nu * x * x / 6.0);
    } else {
        ch = std::cosh(nu * x);
        shn = std::sinh(nu * x) / nu;
    }
    const cd e = std::exp(mu * x);
    const cd b1 = e * (ch + shn * (p - mu));
    const cd b2 = e * shn * (-i * c.g_i);
    return {b1 * std::exp(i * (c.dk * x / 2.0)), b2 * std::exp(-i * (c.dk * x / 2.0))};
}

} // namespace

TEST_CASE("dispersion of the junction-loaded line") {
    TwpaParams p;
    // Long-wavelength limit: k -> omega sqrt(LC).
    const double f_lo = p.omega_j / (2.0 * std::numbers::pi) / 25.0;
    const double k_lo = dispersion_k(p, Frequency(f_lo)).real();
    const double k0 = 2.0 * std::numbers::pi * f_lo * std::sqrt(p.l_cell * p.c_cell);
    CHECK_THAT(k_lo, WithinRel(k0, 5e-3));

    CHECK_THAT(dispersion_k(p, Frequency(8e9)).real(), WithinRel(0.3056471914933462, 1e-12));

    // Strictly increasing and superlinear below the plasma resonance.
    double prev_k = 0.0, prev_ratio = 0.0;
    for (double f = 1e9; f < 40e9; f += 1e9) {
        const double k = dispersion_k(p, Frequency(f)).real();
        CHECK(k > prev_k);
        const double ratio = k / f;
        CHECK(ratio > prev_ratio);
        prev_k = k;
        prev_ratio = ratio;
    }

    CHECK_THROWS_AS(dispersion_k(p, Frequency(46.5e9)), std::invalid_argument);
    CHECK_THROWS_AS(dispersion_k(p, Frequency(60e9)), std::invalid_argument);

    // Loss sits in the imaginary part, scaled by the participation knob.
    TwpaParams loss = p;
    loss.loss_participation = 0.5;
    const auto k8 = dispersion_k(loss, Frequency(8e9));
    CHECK_THAT(k8.imag(), WithinRel(k8.real() * loss.tan_delta * 0.5 / 2.0, 1e-12));
}

TEST_CASE("integrator matches the lossless phase-matched closed form") {
    // |a_s|^2 = cosh^2(g x), |a_i|^2 = sinh^2(g x) for dk = 0, no loss.
    for (double gn : {0.0, 0.3, 0.7, 1.3, 2.1, 3.0}) {
        CmeCoefficients c;
        c.g_s = c.g_i = gn / 1000.0;
        const auto r = integrate_cme(c, 1000.0, 1e-12);
        CHECK_THAT(std::norm(r.a_s), WithinRel(std::cosh(gn) * std::cosh(gn), 1e-9));
        CHECK_THAT(std::norm(r.a_i_conj) + 1e-30,
                   WithinRel(std::sinh(gn) * std::sinh(gn) + 1e-30, 1e-9));
    }
}

TEST_CASE("integrator matches the general constant-coefficient solution") {
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        CmeCoefficients c;
        c.g_s = 3e-3 * u(gen);
        c.g_i = 3e-3 * u(gen);
        c.dk = (u(gen) - 0.5) * 2e-2;
        c.alpha_s = 2e-4 * u(gen);
        c.alpha_i = 2e-4 * u(gen);
        const double len = 500.0 + 1000.0 * u(gen);
        const auto got = integrate_cme(c, len, 1e-12);
        const auto want = cme_reference(c, len);
        CHECK_THAT(std::abs(got.a_s - want.a_s), WithinAbs(0.0, 1e-9 * std::abs(want.a_s)));
        CHECK_THAT(std::abs(got.a_i_conj - want.a_i_conj),
                   WithinAbs(0.0, 1e-9 * std::max(1.0, std::abs(want.a_i_conj))));
    }
}

TEST_CASE("photon-flux conservation in the lossless limit") {
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        CmeCoefficients c;
        c.g_s = c.g_i = 4e-3 * u(gen);        // pump strength
        c.dk = (u(gen) - 0.5) * 3e-2;         // detuning
        const double len = 200.0 + 1200.0 * u(gen);
        const auto r = integrate_cme(c, len, 1e-12);
        CHECK_THAT(std::norm(r.a_s) - std::norm(r.a_i_conj), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("fixed-step integrator converges at fourth order") {
    CmeCoefficients c;
    c.g_s = c.g_i = 2e-3;
    c.dk = 5e-3;
    const double len = 1000.0;
    const auto rhs = [&c](double x, const std::array<double, 4>& y) {
        const std::complex<double> as(y[0], y[1]), ai(y[2], y[3]);
        const std::complex<double> rot(std::cos(c.dk * x), std::sin(c.dk * x));
        const auto das = std::complex<double>(0.0, 1.0) * c.g_s * ai * rot;
        const auto dai = -std::complex<double>(0.0, 1.0) * c.g_i * as * std::conj(rot);
        return std::array<double, 4>{das.real(), das.imag(), dai.real(), dai.imag()};
    };
    const auto exact = cme_reference(c, len);
    const auto err_for = [&](int steps) {
        const auto y = ode::rk4_fixed<4>(rhs, {1.0, 0.0, 0.0, 0.0}, 0.0, len, steps);
        return std::abs(std::complex<double>(y[0], y[1]) - exact.a_s);
    };
    const double e1 = err_for(50);
    const double e2 = err_for(100);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.7);
}

TEST_CASE("pump off reproduces the bare line") {
    TwpaParams params = TwpaParams::device_default();
    PumpSetting pump;
    pump.i_p_ratio = 0.0;
    const auto p = cme_integrate(params, pump, Frequency(6.1e9));
    CHECK(p.s_on == p.s_off);
    CHECK(p.g_conv == std::complex<double>(0.0, 0.0));
    CHECK(std::abs(p.s_off) <= 1.0);
}

TEST_CASE("unpumped line is passive") {
    TwpaParams params = TwpaParams::device_default();
    PumpSetting pump;
    pump.i_p_ratio = 0.0;
    for (double f = 4e9; f <= 9e9; f += 0.5e9) {
        const auto p = cme_integrate(params, pump, Frequency(f));
        CHECK(std::abs(p.s_off) <= 1.0);
    }
}

TEST_CASE("port-mirror dressing") {
    using cd = std::complex<double>;
    const cd s_on(3.0, 1.5), s_off(0.4, -0.6);
    // r = 0 is the identity.
    const auto [don0, doff0] = fabry_perot_dress(s_on, s_off, 0.0);
    CHECK(don0 == s_on);
    CHECK(doff0 == s_off);

    // Lossless-line ripple extremes: 20 log10((1+r^2)/(1-r^2)) peak to peak.
    const double r = 0.15;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 4000; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / 4000.0;
        const cd s = std::polar(1.0, phi);
        const auto [don, doff] = fabry_perot_dress(s, s, r);
        const double db = 20.0 * std::log10(std::abs(doff));
        lo = std::min(lo, db);
        hi = std::max(hi, db);
    }
    const double expect = 20.0 * std::log10((1.0 + r * r) / (1.0 - r * r));
    CHECK_THAT(hi - lo, WithinRel(expect, 1e-6));

    // On-resonance singular cavity is flagged: r^2 s_off^2 = 1 exactly.
    CHECK_THROWS_AS(fabry_perot_dress(cd(2.0, 0.0), cd(2.0, 0.0), 0.5), std::runtime_error);
    CHECK_THROWS_AS(fabry_perot_dress(s_on, s_off, 1.0), std::invalid_argument);
}

TEST_CASE("device-scale gain at the reference operating point") {
    const TwpaParams params = TwpaParams::device_default();
    const PumpSetting pump{5.968e9, std::nullopt};
    const auto p = cme_integrate(params, pump, Frequency(5.735e9));
    const double gain_db = 10.0 * std::log10(std::norm(p.s_on));
    CHECK(gain_db >= 10.0);
    CHECK(gain_db <= 16.0);
    // Conversion gain accompanies signal gain.
    CHECK(10.0 * std::log10(std::norm(p.g_conv)) > 8.0);
}

TEST_CASE("gain sweep: unpumped loss grows with frequency") {
    const TwpaParams params = TwpaParams::device_default();
    PumpSetting pump{5.968e9, 0.0};
    std::vector<double> grid;
    for (double f = 4e9; f <= 8e9; f += 0.25e9) grid.push_back(f);
    const auto sweep = gain_sweep(params, pump, grid);
    REQUIRE(sweep.size() == grid.size());
    // The bare attenuation is strictly monotone; port-mirror ripple rides on
    // top of it in the dressed output.
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto a = cme_integrate(params, pump, Frequency(grid[i - 1]));
        const auto b = cme_integrate(params, pump, Frequency(grid[i]));
        CHECK(std::abs(b.s_off) < std::abs(a.s_off));
        CHECK_THAT(sweep[i].loss_db,
                   WithinAbs(-20.0 * std::log10(std::abs(b.s_off)), 0.45));
    }
    // Pump off: dressed gain equals minus the dressed loss.
    for (const auto& s : sweep) CHECK_THAT(s.gain_db, WithinAbs(-s.loss_db, 1e-9));
}

TEST_CASE("gain profile is symmetric about the pump at small detuning") {
    const TwpaParams params = TwpaParams::device_default();
    const PumpSetting pump{5.968e9, std::nullopt};
    for (double d : {20e6, 50e6, 100e6}) {
        const auto plus = cme_integrate(params, pump, Frequency(pump.f_pump_hz + d));
        const auto minus = cme_integrate(params, pump, Frequency(pump.f_pump_hz - d));
        const double gp = 10.0 * std::log10(std::norm(plus.s_on));
        const double gm = 10.0 * std::log10(std::norm(minus.s_on));
        CHECK_THAT(gp, WithinAbs(gm, 0.35));
    }
}

TEST_CASE("device parameter validation") {
    TwpaParams p;
    CHECK(p.total_junctions() == 4064);
    CHECK_THAT(p.t_mirror() * p.t_mirror() + p.r_mirror * p.r_mirror, WithinAbs(1.0, 1e-12));
    p.i_p_ratio = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = TwpaParams{};
    p.loss_participation = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = TwpaParams{};
    p.r_mirror = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
