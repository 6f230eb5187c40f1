// SPDX-License-Identifier: MIT
#pragma once

// Closed-form pieces of the Merton proxy: Gaussian single-bucket payoff
// expectations and their derivatives in the mean, and Poisson mixtures of them.

#include <cmath>
#include <cstddef>

#include "jdexp/errors.hpp"
#include "jdexp/model.hpp"
#include "jdexp/normal.hpp"

namespace jdexp {

/// Law of the proxy X^M_T: given n jumps it is N(base_mean + n eta, base_var + n gamma^2).
struct ProxyLaw {
    double base_mean = 0.0;
    double base_var = 0.0;
    JumpParams jumps;
    double horizon = 0.0;
};

/// Everything the payoff h needs besides the state variable.
///
/// Log-asset: h(x) = discount (carry e^x - K)_+ (and the put/digital analogues).
/// Normal-asset: h(x) = discount (x - K)_+; carry is unused.
struct DealTerms {
    double discount = 1.0;
    double carry = 1.0;
    Payoff payoff;
    ModelVariant variant = ModelVariant::LogAssetAA;
};

inline DealTerms make_deal(const ModelSpec& model, const Payoff& payoff)
{
    const double T = payoff.maturity;
    return {model.env().discount(T), model.variant() == ModelVariant::LogAssetAA ? model.env().carry(T) : 1.0,
            payoff, model.variant()};
}

/// h(x) itself.
inline double payoff_value(const DealTerms& deal, double x) noexcept
{
    const double K = deal.payoff.strike;
    const double s = deal.variant == ModelVariant::LogAssetAA ? deal.carry * std::exp(x) : x;
    switch (deal.payoff.kind) {
    case PayoffKind::Call: return deal.discount * std::max(s - K, 0.0);
    case PayoffKind::Put: return deal.discount * std::max(K - s, 0.0);
    case PayoffKind::DigitalCall: return s > K ? deal.discount : 0.0;
    }
    return 0.0;
}

/// i-th derivative at 0 of x -> E[h(G + x)] with G ~ N(m, V), i in 0..3.
inline double gaussian_payoff_derivative(int order, double m, double V, const DealTerms& deal)
{
    if (order < 0 || order > 3)
        throw UnsupportedOrder("payoff derivative order must be in 0..3");
    if (!(V > 0.0) || !std::isfinite(V))
        throw DegenerateVariance("Gaussian bucket variance must be > 0");

    const double D = deal.discount;
    const double K = deal.payoff.strike;
    const double s = std::sqrt(V);

    if (deal.variant == ModelVariant::LogAssetAA) {
        const double d2 = (m - std::log(K / deal.carry)) / s;
        if (deal.payoff.kind == PayoffKind::DigitalCall) {
            const double phi = normal_pdf(d2);
            switch (order) {
            case 0: return D * normal_cdf(d2);
            case 1: return D * phi / s;
            case 2: return -D * d2 * phi / V;
            default: return D * (d2 * d2 - 1.0) * phi / (V * s);
            }
        }
        const double d1 = d2 + s;
        const double E = D * deal.carry * std::exp(m + 0.5 * V);
        const bool call = deal.payoff.kind == PayoffKind::Call;
        const double first = call ? E * normal_cdf(d1) : -E * normal_cdf(-d1);
        if (order == 0)
            return call ? first - D * K * normal_cdf(d2) : first + D * K * normal_cdf(-d2);
        if (order == 1)
            return first;
        const double q = E * normal_pdf(d1) / s;
        if (order == 2)
            return first + q;
        return first + q + q * (1.0 - d1 / s);
    }

    const double z = (m - K) / s;
    const double phi = normal_pdf(z);
    if (deal.payoff.kind == PayoffKind::DigitalCall) {
        switch (order) {
        case 0: return D * normal_cdf(z);
        case 1: return D * phi / s;
        case 2: return -D * z * phi / V;
        default: return D * (z * z - 1.0) * phi / (V * s);
        }
    }
    const bool call = deal.payoff.kind == PayoffKind::Call;
    switch (order) {
    case 0: return call ? D * ((m - K) * normal_cdf(z) + s * phi) : D * ((K - m) * normal_cdf(-z) + s * phi);
    case 1: return call ? D * normal_cdf(z) : -D * normal_cdf(-z);
    case 2: return D * phi / s;
    default: return -D * z * phi / V;
    }
}

namespace detail {

inline constexpr double kPoissonMassTol = 1e-12;
inline constexpr double kSeriesTermTol = 1e-13;
inline constexpr std::size_t kSeriesCap = 200;

}  // namespace detail

/// Number of Poisson buckets the mixture series used (n* + 1), with its weights summed.
struct SeriesInfo {
    std::size_t terms = 0;
    double mass = 0.0;
};

/// sum_n P(N_T = n) f(mean_n, var_n). Stops at the first n with cumulative
/// mass >= 1 - 1e-12 and |term| < 1e-13 |sum|, or after 201 buckets.
template <class F>
double poisson_mixture(const ProxyLaw& law, bool shifted_by_jump_copy, F&& f, SeriesInfo* info = nullptr)
{
    const auto& j = law.jumps;
    const double intensity = j.lambda * law.horizon;
    const double g2 = j.gamma * j.gamma;
    double mean = law.base_mean;
    double var = law.base_var;
    if (shifted_by_jump_copy) {
        mean += j.eta;
        var += g2;
    }
    double weight = std::exp(-intensity);
    double mass = 0.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (;; ++n) {
        const double term = weight * f(mean, var);
        sum += term;
        mass += weight;
        if (intensity == 0.0 || n >= detail::kSeriesCap)
            break;
        if (mass >= 1.0 - detail::kPoissonMassTol && std::abs(term) <= detail::kSeriesTermTol * std::abs(sum))
            break;
        weight *= intensity / static_cast<double>(n + 1);
        mean += j.eta;
        var += g2;
    }
    if (info)
        *info = {n + 1, mass};
    return sum;
}

/// E[h(X^M_T)] as a Poisson mixture of Gaussian expectations.
inline double merton_price(const ProxyLaw& law, const DealTerms& deal, SeriesInfo* info = nullptr)
{
    return poisson_mixture(
        law, false, [&](double m, double v) { return gaussian_payoff_derivative(0, m, v, deal); }, info);
}

/// G^h_i(X^M_T), or G^h_i(X^M_T + Y') when `shifted_by_jump_copy` is set.
inline double merton_greek(int order, const ProxyLaw& law, const DealTerms& deal, bool shifted_by_jump_copy)
{
    if (order < 1 || order > 3)
        throw UnsupportedOrder("Merton greek order must be in 1..3");
    return poisson_mixture(law, shifted_by_jump_copy,
                           [&](double m, double v) { return gaussian_payoff_derivative(order, m, v, deal); });
}

/// Black (forward) price; stdev = v sqrt(T).
inline double black_price(PayoffKind kind, double forward, double strike, double stdev, double discount)
{
    if (!(stdev > 0.0)) {
        switch (kind) {
        case PayoffKind::Call: return discount * std::max(forward - strike, 0.0);
        case PayoffKind::Put: return discount * std::max(strike - forward, 0.0);
        case PayoffKind::DigitalCall: return forward > strike ? discount : 0.0;
        }
    }
    const double d1 = std::log(forward / strike) / stdev + 0.5 * stdev;
    const double d2 = d1 - stdev;
    switch (kind) {
    case PayoffKind::Call: return discount * (forward * normal_cdf(d1) - strike * normal_cdf(d2));
    case PayoffKind::Put: return discount * (strike * normal_cdf(-d2) - forward * normal_cdf(-d1));
    case PayoffKind::DigitalCall: return discount * normal_cdf(d2);
    }
    return 0.0;
}

inline double black_vega(double forward, double strike, double T, double vol, double discount)
{
    const double stdev = vol * std::sqrt(T);
    const double d1 = std::log(forward / strike) / stdev + 0.5 * stdev;
    return discount * forward * normal_pdf(d1) * std::sqrt(T);
}

/// Bachelier (normal) price; stdev = v sqrt(T) in price units.
inline double bachelier_price(PayoffKind kind, double forward, double strike, double stdev, double discount)
{
    if (!(stdev > 0.0))
        return black_price(kind, forward, strike, 0.0, discount);
    const double z = (forward - strike) / stdev;
    switch (kind) {
    case PayoffKind::Call: return discount * ((forward - strike) * normal_cdf(z) + stdev * normal_pdf(z));
    case PayoffKind::Put: return discount * ((strike - forward) * normal_cdf(-z) + stdev * normal_pdf(z));
    case PayoffKind::DigitalCall: return discount * normal_cdf(z);
    }
    return 0.0;
}

inline double bachelier_vega(double forward, double strike, double T, double vol, double discount)
{
    const double stdev = vol * std::sqrt(T);
    return discount * std::sqrt(T) * normal_pdf((forward - strike) / stdev);
}

}  // namespace jdexp
