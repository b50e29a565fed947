#pragma once

#include <stdexcept>

namespace optnet {

/// Constant market parameters, all per-year. `mu` is the real-world drift
/// and is only consumed by the simulator; pricing uses r, q, sigma.
struct MarketParams {
    double r = 0.02;       // risk-free rate
    double q = 0.0;        // dividend yield, >= 0
    double sigma = 0.2;    // volatility per sqrt(year), > 0
    double mu = 0.1;       // drift, simulator only

    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("MarketParams: sigma must be > 0");
        if (!(q >= 0.0)) throw std::invalid_argument("MarketParams: q must be >= 0");
    }
};

/// A strike-normalized quote: moneyness S/K and time to maturity in years.
/// Valid domain is moneyness > 0, tau in [0, 1]. All prices returned by
/// this module are in units of the strike.
struct NormalizedQuote {
    double moneyness = 1.0;
    double tau = 0.0;
};

/// Standard normal CDF. Rational-approximation implementation (Cody-style
/// erf/erfc), absolute error well under 1e-12 including the far tails.
double norm_cdf(double x);

/// Upper tail 1 - norm_cdf(x), computed without cancellation. Accurate in
/// relative terms out to the underflow limit; needed by the tail checks.
double norm_cdf_upper(double x);

struct D1D2 {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// The d1/d2 arguments of the Black-Scholes formula. Requires tau > 0
/// (the tau = 0 boundary is handled by the pricing functions as a limit).
D1D2 d1_d2(const NormalizedQuote& quote, const MarketParams& params);

/// Strike-normalized European call value:
///   s*exp(-q*tau)*N(d1) - exp(-r*tau)*N(d2),  with value (s-1)+ at tau = 0.
double call_value(const NormalizedQuote& quote, const MarketParams& params);

/// Strike-normalized discounted intrinsic value (s*exp(-q*tau) - exp(-r*tau))+.
double intrinsic_value(const NormalizedQuote& quote, const MarketParams& params);

/// Strike-normalized time value: call_value - intrinsic_value, >= 0,
/// identically 0 at tau = 0. Evaluated through the complementary normal
/// tail so it keeps relative accuracy deep in the money.
double time_value(const NormalizedQuote& quote, const MarketParams& params);

}  // namespace optnet
