#include "optnet/pricing.hpp"

#include <algorithm>
#include <cmath>

namespace optnet {
namespace {

// Rational Chebyshev approximations for erf/erfc after W. J. Cody
// (SPECFUN's CALERF), relative error around 1e-16 in each regime.

constexpr double kErfA[5] = {3.16112374387056560e0, 1.13864154151050156e2,
                             3.77485237685302021e2, 3.20937758913846947e3,
                             1.85777706184603153e-1};
constexpr double kErfB[4] = {2.36012909523441209e1, 2.44024637934444173e2,
                             1.28261652607737228e3, 2.84423683343917062e3};

constexpr double kErfcC[9] = {5.64188496988670089e-1, 8.88314979438837594e0,
                              6.61191906371416295e1,  2.98635138197400131e2,
                              8.81952221241769090e2,  1.71204761263407058e3,
                              2.05107837782607147e3,  1.23033935479799725e3,
                              2.15311535474403846e-8};
constexpr double kErfcD[8] = {1.57449261107098347e1, 1.17693950891312499e2,
                              5.37181101862009858e2, 1.62138957456669019e3,
                              3.29079923573345963e3, 4.36261909014324716e3,
                              3.43936767414372164e3, 1.23033935480374942e3};

constexpr double kErfcP[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                              1.25781726111229246e-1, 1.60837851487422766e-2,
                              6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr double kErfcQ[5] = {2.56852019228982242e0, 1.87295284992346047e0,
                              5.27905102951428412e-1, 6.05183413124413191e-2,
                              2.33520497626869185e-3};

constexpr double kInvSqrtPi = 5.6418958354775628695e-1;
constexpr double kErfcUnderflow = 26.543;  // erfc underflows past here

// erf on |x| <= 0.46875.
double erf_small(double x) {
    const double ysq = x * x;
    double xnum = kErfA[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
        xnum = (xnum + kErfA[i]) * ysq;
        xden = (xden + kErfB[i]) * ysq;
    }
    return x * (xnum + kErfA[3]) / (xden + kErfB[3]);
}

// exp(-y^2) split as exp(-hi^2)*exp(-(y-hi)(y+hi)) with hi = trunc(16y)/16,
// which keeps the argument rounding error out of the steep exponential.
double exp_neg_square(double y) {
    const double hi = std::trunc(y * 16.0) / 16.0;
    const double del = (y - hi) * (y + hi);
    return std::exp(-hi * hi) * std::exp(-del);
}

// erfc on y >= 0.46875.
double erfc_tail(double y) {
    if (y >= kErfcUnderflow) return 0.0;
    double result;
    if (y <= 4.0) {
        double xnum = kErfcC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kErfcC[i]) * y;
            xden = (xden + kErfcD[i]) * y;
        }
        result = (xnum + kErfcC[7]) / (xden + kErfcD[7]);
    } else {
        const double ysq = 1.0 / (y * y);
        double xnum = kErfcP[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + kErfcP[i]) * ysq;
            xden = (xden + kErfcQ[i]) * ysq;
        }
        result = ysq * (xnum + kErfcP[4]) / (xden + kErfcQ[4]);
        result = (kInvSqrtPi - result) / y;
    }
    return exp_neg_square(y) * result;
}

double erfc_impl(double x) {
    const double y = std::fabs(x);
    double result;
    if (y <= 0.46875) {
        result = 1.0 - erf_small(x);
        return result;
    }
    result = erfc_tail(y);
    return (x < 0.0) ? 2.0 - result : result;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

double norm_cdf(double x) { return 0.5 * erfc_impl(-x * kInvSqrt2); }

double norm_cdf_upper(double x) { return 0.5 * erfc_impl(x * kInvSqrt2); }

D1D2 d1_d2(const NormalizedQuote& quote, const MarketParams& params) {
    params.validate();
    if (!(quote.moneyness > 0.0)) throw std::invalid_argument("d1_d2: moneyness must be > 0");
    if (!(quote.tau > 0.0))
        throw std::invalid_argument("d1_d2: tau must be > 0; use the pricing limit at expiry");
    const double vol_sqrt_tau = params.sigma * std::sqrt(quote.tau);
    const double d1 = (std::log(quote.moneyness) +
                       (params.r - params.q + 0.5 * params.sigma * params.sigma) * quote.tau) /
                      vol_sqrt_tau;
    return {d1, d1 - vol_sqrt_tau};
}

double call_value(const NormalizedQuote& quote, const MarketParams& params) {
    if (quote.tau == 0.0) return std::max(quote.moneyness - 1.0, 0.0);
    const auto d = d1_d2(quote, params);
    const double forward = quote.moneyness * std::exp(-params.q * quote.tau);
    const double discount = std::exp(-params.r * quote.tau);
    return forward * norm_cdf(d.d1) - discount * norm_cdf(d.d2);
}

double intrinsic_value(const NormalizedQuote& quote, const MarketParams& params) {
    params.validate();
    const double forward = quote.moneyness * std::exp(-params.q * quote.tau);
    const double discount = std::exp(-params.r * quote.tau);
    return std::max(forward - discount, 0.0);
}

double time_value(const NormalizedQuote& quote, const MarketParams& params) {
    if (quote.tau == 0.0) return 0.0;
    const auto d = d1_d2(quote, params);
    const double forward = quote.moneyness * std::exp(-params.q * quote.tau);
    const double discount = std::exp(-params.r * quote.tau);
    if (forward <= discount) {
        // out of the money: time value is the whole call value
        return forward * norm_cdf(d.d1) - discount * norm_cdf(d.d2);
    }
    // in the money: complementary form avoids the 1 - N(d) cancellation
    return std::max(discount * norm_cdf_upper(d.d2) - forward * norm_cdf_upper(d.d1), 0.0);
}

}  // namespace optnet
