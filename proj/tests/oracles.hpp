// Test-only oracles, kept independent of the library paths they check:
// erf via long-double Taylor series / continued fraction, and call-price
// references via lognormal quadrature and Monte Carlo.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "optnet/quadrature.hpp"
#include "optnet/rng.hpp"

namespace oracles {

// Maclaurin series of erf, long double. Accurate to ~1e-17 for |x| <= 2.
inline long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589031215L;
    long double term = x;
    long double sum = x;
    const long double x2 = x * x;
    for (int n = 1; n < 200; ++n) {
        term *= -x2 / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// Continued fraction for erfc (modified Lentz), long double, for x >= 1.
inline long double erfc_cf(long double x) {
    const long double tiny = 1e-30L;
    long double f = x, c = x, d = 0.0L;
    for (int n = 1; n < 300; ++n) {
        const long double a = n / 2.0L;  // partial numerator
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-20L) break;
    }
    const long double inv_sqrt_pi = 0.56418958354775628694807945156077L;
    return inv_sqrt_pi * std::exp(-x * x) / f;
}

inline long double erf_oracle(long double x) {
    const long double ax = std::fabs(x);
    long double v;
    if (ax <= 2.0L)
        v = erf_series(ax);
    else
        v = 1.0L - erfc_cf(ax);
    return x < 0 ? -v : v;
}

inline long double erfc_oracle(long double x) {
    if (x >= 2.0L) return erfc_cf(x);
    if (x <= -2.0L) return 2.0L - erfc_cf(-x);
    return 1.0L - erf_series(x);
}

inline double norm_cdf_oracle(double x) {
    const long double inv_sqrt2 = 0.70710678118654752440084436210485L;
    return static_cast<double>(0.5L * erfc_oracle(-static_cast<long double>(x) * inv_sqrt2));
}

// Strike-normalized call value by adaptive quadrature of the discounted
// payoff against the lognormal terminal density.
inline double call_value_quadrature(double s, double tau, double r, double q, double sigma) {
    if (tau <= 0.0) return std::max(s - 1.0, 0.0);
    const double m = (r - q - 0.5 * sigma * sigma) * tau;
    const double v = sigma * std::sqrt(tau);
    const double z0 = (std::log(1.0 / s) - m) / v;
    const double hi = std::max(z0, v) + 45.0;
    const double inv_sqrt_2pi = 0.39894228040143267793994605993438;
    const double integral = optnet::integrate_adaptive(
        [&](double z) {
            const double payoff = s * std::exp(m + v * z) - 1.0;
            return payoff * inv_sqrt_2pi * std::exp(-0.5 * z * z);
        },
        z0, hi, 1e-13, 1e-300, 20000);
    return std::exp(-r * tau) * integral;
}

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Strike-normalized call value by Monte Carlo over lognormal terminal
// draws (inverse-CDF sampling from the seeded stream).
inline McEstimate call_value_monte_carlo(double s, double tau, double r, double q, double sigma,
                                         std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 2) throw std::invalid_argument("call_value_monte_carlo: need n_paths >= 2");
    const double m = (r - q - 0.5 * sigma * sigma) * tau;
    const double v = sigma * std::sqrt(tau);
    const double discount = std::exp(-r * tau);

    optnet::Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double payoff = std::max(s * std::exp(m + v * rng.normal()) - 1.0, 0.0);
        sum += payoff;
        sum_sq += payoff * payoff;
    }
    const double n = static_cast<double>(n_paths);
    const double mean = sum / n;
    const double variance = std::max(sum_sq / n - mean * mean, 0.0);
    return {discount * mean, discount * std::sqrt(variance / n)};
}

}  // namespace oracles
