// SPDX-License-Identifier: MIT
#pragma once

// Extended-precision reference for the Merton proxy price, used to take finite
// differences well below double rounding noise. Real is a Boost.Multiprecision
// float: quad (hardware-assisted, fast) or mp50 (cross-check).

#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/float128.hpp>

#include "jdexp/jdexp.hpp"

namespace jdexp::fixtures {

using mp50 = boost::multiprecision::cpp_bin_float_50;
using quad = boost::multiprecision::float128;

template <class Real>
Real mp_cdf(const Real& x)
{
    using std::sqrt;
    return boost::math::erfc(Real(-x / sqrt(Real(2)))) / 2;
}

template <class Real>
Real mp_pdf(const Real& x)
{
    using std::exp;
    using std::sqrt;
    static const Real inv_sqrt_2pi = 1 / sqrt(2 * boost::math::constants::pi<Real>());
    return inv_sqrt_2pi * exp(-x * x / 2);
}

/// E[h(G)], G ~ N(m, V).
template <class Real>
Real mp_gaussian_price(const Real& m, const Real& V, const DealTerms& deal)
{
    using std::exp;
    using std::log;
    using std::sqrt;
    const Real D = deal.discount, K = deal.payoff.strike, s = sqrt(V);
    const auto kind = deal.payoff.kind;
    if (deal.variant == ModelVariant::LogAssetAA) {
        const Real C = deal.carry;
        const Real d2 = (m - log(K / C)) / s;
        const Real d1 = d2 + s;
        const Real fwd = C * exp(m + V / 2);
        if (kind == PayoffKind::Call)
            return D * (fwd * mp_cdf<Real>(d1) - K * mp_cdf<Real>(d2));
        if (kind == PayoffKind::Put)
            return D * (K * mp_cdf<Real>(-d2) - fwd * mp_cdf<Real>(-d1));
        return D * mp_cdf<Real>(d2);
    }
    const Real z = (m - K) / s;
    if (kind == PayoffKind::Call)
        return D * ((m - K) * mp_cdf<Real>(z) + s * mp_pdf<Real>(z));
    if (kind == PayoffKind::Put)
        return D * ((K - m) * mp_cdf<Real>(-z) + s * mp_pdf<Real>(z));
    return D * mp_cdf<Real>(z);
}

/// Poisson mixture summed until the remaining Poisson weight is below 1e-40.
template <class Real>
Real mp_merton_price(const Real& base_mean, const Real& base_var, const JumpParams& j, double horizon,
                     const DealTerms& deal, int terms = 400)
{
    using std::exp;
    const Real intensity = Real(j.lambda) * horizon;
    Real weight = exp(-intensity);
    Real sum = 0;
    for (int n = 0; n < terms; ++n) {
        sum += weight * mp_gaussian_price<Real>(base_mean + n * Real(j.eta), base_var + n * Real(j.gamma) * j.gamma, deal);
        if (j.lambda == 0.0)
            break;
        weight *= intensity / (n + 1);
        if (n > intensity && weight < Real(1e-40))
            break;
    }
    return sum;
}

/// d^order/dx^order at 0 by 7-point central differences from samples f(-3h), ..., f(3h).
template <class Real>
Real mp_central_difference(int order, const Real& h, const Real (&f)[7])
{
    using std::pow;
    static const Real c1[7] = {Real(-1) / 60, Real(3) / 20, Real(-3) / 4, 0, Real(3) / 4, Real(-3) / 20, Real(1) / 60};
    static const Real c2[7] = {Real(1) / 90, Real(-3) / 20, Real(3) / 2, Real(-49) / 18,
                               Real(3) / 2,  Real(-3) / 20, Real(1) / 90};
    static const Real c3[7] = {Real(1) / 8, -1, Real(13) / 8, 0, Real(-13) / 8, 1, Real(-1) / 8};
    const Real* c = order == 1 ? c1 : order == 2 ? c2 : c3;
    Real acc = 0;
    for (int k = 0; k < 7; ++k)
        if (c[k] != 0)
            acc += c[k] * f[k];
    return acc / pow(h, order);
}

}  // namespace jdexp::fixtures
