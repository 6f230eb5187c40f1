// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "jdexp/analytic.hpp"
#include "jdexp/errors.hpp"

namespace jdexp {

struct ImpliedVolBracket {
    double lower = 1e-6;
    double upper = 5.0;
};

namespace detail {

/// Corrado-Miller total-stdev guess from an undiscounted call price.
inline double corrado_miller_stdev(double call, double forward, double strike)
{
    const double half_gap = 0.5 * (forward - strike);
    const double a = call - half_gap;
    const double disc = a * a - (forward - strike) * (forward - strike) / std::numbers::pi;
    return std::sqrt(2.0 * std::numbers::pi) / (forward + strike) * (a + std::sqrt(std::max(disc, 0.0)));
}

/// Safeguarded Newton on a price increasing in vol; bisection whenever the
/// Newton iterate leaves the bracket.
template <class Price, class Vega>
double newton_bisect(Price&& price, Vega&& vega, double target, double lo, double hi, double guess)
{
    double v = std::clamp(guess, lo, hi);
    if (!(v > lo && v < hi))
        v = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = price(v) - target;
        if (f == 0.0)
            return v;
        if (f > 0.0)
            hi = v;
        else
            lo = v;
        const double dv = vega(v);
        double next = (dv > 0.0 && std::isfinite(dv)) ? v - f / dv : lo - 1.0;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) <= 1e-15 * v || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            return next;
        v = next;
    }
    return v;
}

}  // namespace detail

/// Black-Scholes (log-asset) or Bachelier (normal-asset) volatility reproducing
/// `price` for the call or put described by `deal`, on the given forward.
///
/// Throws NoSolution carrying the discounted no-arbitrage band when the price
/// is outside it, or outside what the volatility bracket can reach.
inline double implied_vol(double price, const DealTerms& deal, double forward,
                          std::optional<ImpliedVolBracket> bracket = std::nullopt)
{
    const auto kind = deal.payoff.kind;
    if (kind == PayoffKind::DigitalCall)
        throw InvalidArgument("implied volatility is defined for calls and puts only");
    const double T = deal.payoff.maturity;
    const double K = deal.payoff.strike;
    const double D = deal.discount;
    const bool call = kind == PayoffKind::Call;
    const bool log_model = deal.variant == ModelVariant::LogAssetAA;
    if (log_model && !(forward > 0.0))
        throw InvalidArgument("forward must be > 0 for Black implied volatility");

    const double undiscounted = price / D;
    const double lower = call ? std::max(forward - K, 0.0) : std::max(K - forward, 0.0);
    const double upper = log_model ? (call ? forward : K) : std::numeric_limits<double>::infinity();
    if (!(undiscounted > lower && undiscounted < upper) || !std::isfinite(price))
        throw NoSolution("price outside the no-arbitrage band", D * lower, D * upper);

    // Solve on the out-of-the-money side where the time value is not swamped by intrinsic value.
    const bool otm_call = K >= forward;
    const PayoffKind solve_kind = otm_call ? PayoffKind::Call : PayoffKind::Put;
    double target = undiscounted;
    if (call && !otm_call)
        target = undiscounted - (forward - K);
    else if (!call && otm_call)
        target = undiscounted + (forward - K);
    if (!(target > 0.0))
        throw NoSolution("time value vanishes at working precision", D * lower, D * upper);

    const double sqrtT = std::sqrt(T);
    if (log_model) {
        const auto br = bracket.value_or(ImpliedVolBracket{});
        auto px = [&](double v) { return black_price(solve_kind, forward, K, v * sqrtT, 1.0); };
        auto vg = [&](double v) { return black_vega(forward, K, T, v, 1.0); };
        if (px(br.lower) > target || px(br.upper) < target)
            throw NoSolution("price not reachable inside the volatility bracket", D * px(br.lower), D * px(br.upper));
        const double call_equiv = solve_kind == PayoffKind::Call ? target : target + (forward - K);
        const double guess = detail::corrado_miller_stdev(call_equiv, forward, K) / sqrtT;
        return detail::newton_bisect(px, vg, target, br.lower, br.upper, std::isfinite(guess) ? guess : 0.2);
    }

    const double scale = std::max(std::abs(forward), K);
    const auto br = bracket.value_or(ImpliedVolBracket{1e-8 * scale, 5.0 * scale});
    auto px = [&](double v) { return bachelier_price(solve_kind, forward, K, v * sqrtT, 1.0); };
    auto vg = [&](double v) { return bachelier_vega(forward, K, T, v, 1.0); };
    if (px(br.lower) > target || px(br.upper) < target)
        throw NoSolution("price not reachable inside the volatility bracket", D * px(br.lower), D * px(br.upper));
    const double guess = target * std::sqrt(2.0 * std::numbers::pi) / sqrtT;
    return detail::newton_bisect(px, vg, target, br.lower, br.upper, guess);
}

}  // namespace jdexp
