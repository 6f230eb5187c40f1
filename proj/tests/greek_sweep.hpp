// SPDX-License-Identifier: MIT
#pragma once

// Randomized comparison of merton_greek against central finite differences of
// an extended-precision Merton price.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mp_oracle.hpp"

namespace jdexp::fixtures {

struct GreekSweepResult {
    int cases = 0;
    int failures = 0;
    double worst = 0.0;
    std::string first_failure;
    std::vector<double> fd;     ///< finite-difference values in sweep order
    std::vector<double> scale;  ///< error floor / tol per case
};

/// Both variants x call/put/digital x shift flag x orders 1..3 per trial.
/// Error is relative, with a floor of 1e-10 * level / s^order near zero crossings.
template <class Real>
GreekSweepResult greek_sweep(std::uint64_t seed, int trials, double tol = 1e-6)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GreekSweepResult out;
    for (int trial = 0; trial < trials; ++trial) {
        for (auto variant : {ModelVariant::LogAssetAA, ModelVariant::NormalAsset}) {
            const double T = 0.1 + 4.9 * u(rng);
            JumpParams j;
            j.lambda = u(rng) < 0.15 ? 0.0 : 1.2 * u(rng);
            ProxyLaw law;
            law.horizon = T;
            DealTerms deal;
            deal.variant = variant;
            deal.discount = std::exp(-0.05 * u(rng) * T);
            deal.payoff.maturity = T;
            if (variant == ModelVariant::LogAssetAA) {
                const double vol = 0.05 + 0.45 * u(rng);
                j.eta = -0.3 + 0.4 * u(rng);
                j.gamma = 0.05 + 0.35 * u(rng);
                law.base_var = vol * vol * T;
                law.base_mean = std::log(100.0) - 0.5 * law.base_var;
                deal.carry = std::exp(0.04 * (u(rng) - 0.3) * T);
                deal.payoff.strike = 100.0 * (0.6 + u(rng));
            } else {
                const double vol = 5.0 + 35.0 * u(rng);
                j.eta = -10.0 + 15.0 * u(rng);
                j.gamma = 1.0 + 14.0 * u(rng);
                law.base_var = vol * vol * T;
                law.base_mean = 100.0;
                deal.payoff.strike = 60.0 + 90.0 * u(rng);
            }
            law.jumps = j;
            for (auto kind : {PayoffKind::Call, PayoffKind::Put, PayoffKind::DigitalCall}) {
                deal.payoff.kind = kind;
                for (bool shifted : {false, true}) {
                    const Real m0 = Real(law.base_mean) + (shifted ? Real(j.eta) : Real(0));
                    const Real v0 = Real(law.base_var) + (shifted ? Real(j.gamma) * j.gamma : Real(0));
                    const double s = std::sqrt(law.base_var);
                    const Real h = Real(1e-3 * s);
                    Real samples[7];
                    for (int k = -3; k <= 3; ++k)
                        samples[k + 3] = mp_merton_price<Real>(m0 + h * k, v0, j, T, deal);
                    const double level = kind == PayoffKind::DigitalCall ? deal.discount
                                                                        : deal.discount * deal.payoff.strike;
                    for (int order = 1; order <= 3; ++order) {
                        const double fd = static_cast<double>(mp_central_difference<Real>(order, h, samples));
                        const double an = merton_greek(order, law, deal, shifted);
                        const double floor = 1e-10 * level / std::pow(s, order);
                        const double err = std::abs(an - fd) / std::max(std::abs(fd), floor / tol);
                        out.worst = std::max(out.worst, err);
                        ++out.cases;
                        out.fd.push_back(fd);
                        out.scale.push_back(floor / tol);
                        if (err > tol && ++out.failures == 1) {
                            std::ostringstream os;
                            os << "order " << order << " kind " << static_cast<int>(kind) << " variant "
                               << static_cast<int>(variant) << " shifted " << shifted << " analytic " << an << " fd "
                               << fd;
                            out.first_failure = os.str();
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace jdexp::fixtures
