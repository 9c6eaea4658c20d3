#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace cryonoise::ode {

namespace detail {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, const State<N>& d) {
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * d[i];
    return out;
}

} // namespace detail

/// One classic RK4 step.
template <std::size_t N, typename Rhs>
detail::State<N> rk4_step(Rhs&& f, const detail::State<N>& y, double x, double h) {
    using detail::axpy;
    const auto k1 = f(x, y);
    const auto k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1));
    const auto k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2));
    const auto k4 = f(x + h, axpy(y, h, k3));
    detail::State<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

/// Fixed-step RK4 over [x0, x1] with the given number of steps.
template <std::size_t N, typename Rhs>
detail::State<N> rk4_fixed(Rhs&& f, detail::State<N> y, double x0, double x1, int steps) {
    if (steps < 1) throw std::invalid_argument("rk4_fixed: steps must be >= 1");
    const double h = (x1 - x0) / steps;
    double x = x0;
    for (int s = 0; s < steps; ++s) {
        y = rk4_step<N>(f, y, x, h);
        x = x0 + (s + 1) * h;
    }
    return y;
}

/// Adaptive Dormand-Prince 5(4) integration of y' = f(x, y) over [x0, x1].
/// Error per step is controlled against atol + rtol*|y|.
template <std::size_t N, typename Rhs>
detail::State<N> integrate_adaptive(Rhs&& f, detail::State<N> y, double x0, double x1,
                                    double rtol = 1e-10, double atol = 1e-14) {
    using detail::axpy;
    if (x1 == x0) return y;
    const double span = x1 - x0;
    if (!(span > 0.0)) throw std::invalid_argument("integrate_adaptive: x1 must exceed x0");

    // Dormand-Prince 5(4) tableau.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double x = x0;
    double h = span / 16.0;
    const double h_min = span * 1e-14;
    int guard = 0;

    while (x < x1) {
        if (++guard > 10'000'000) throw std::runtime_error("integrate_adaptive: step budget exhausted");
        h = std::min(h, x1 - x);

        const auto k1 = f(x, y);
        const auto k2 = f(x + c2 * h, axpy(y, h * a21, k1));
        detail::State<N> t;
        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const auto k3 = f(x + c3 * h, t);
        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const auto k4 = f(x + c4 * h, t);
        for (std::size_t i = 0; i < N; ++i) {
            t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        }
        const auto k5 = f(x + c5 * h, t);
        for (std::size_t i = 0; i < N; ++i) {
            t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        }
        const auto k6 = f(x + h, t);

        detail::State<N> y5;
        for (std::size_t i = 0; i < N; ++i) {
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        }
        const auto k7 = f(x + h, y5);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double r = e / scale;
            err += r * r;
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            x += h;
            y = y5;
        }
        const double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < h_min) throw std::runtime_error("integrate_adaptive: step size underflow");
    }
    return y;
}

} // namespace cryonoise::ode
