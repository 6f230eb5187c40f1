// SPDX-License-Identifier: MIT

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "jdexp/jdexp.hpp"
#include "greek_sweep.hpp"
#include "mp_oracle.hpp"
#include "test_support.hpp"

using namespace jdexp;

namespace {

DealTerms log_deal(PayoffKind kind, double K, double discount = 1.0, double carry = 1.0)
{
    return {discount, carry, {kind, K, 1.0}, ModelVariant::LogAssetAA};
}

DealTerms normal_deal(PayoffKind kind, double K, double discount = 1.0)
{
    return {discount, 1.0, {kind, K, 1.0}, ModelVariant::NormalAsset};
}

/// E[h(G)] by adaptive Gauss-Kronrod over +-12 standard deviations.
double integrate_payoff(double m, double V, const DealTerms& deal)
{
    const double s = std::sqrt(V);
    auto f = [&](double x) { return payoff_value(deal, x) * normal_pdf((x - m) / s) / s; };
    // split at the kink so the integrand is smooth on each piece
    const double kink = deal.variant == ModelVariant::LogAssetAA ? std::log(deal.payoff.strike / deal.carry)
                                                                 : deal.payoff.strike;
    const double lo = m - 12 * s, hi = m + 12 * s;
    double total = 0.0;
    using boost::math::quadrature::gauss_kronrod;
    if (kink > lo && kink < hi) {
        total += gauss_kronrod<double, 61>::integrate(f, lo, kink, 15, 1e-13);
        total += gauss_kronrod<double, 61>::integrate(f, kink, hi, 15, 1e-13);
    } else {
        total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
    }
    return total;
}

}  // namespace

TEST(GaussianPayoff, CallAgainstIntegration)
{
    const auto deal = log_deal(PayoffKind::Call, 100.0);
    const double v = gaussian_payoff_derivative(0, std::log(100.0), 0.04, deal);
    EXPECT_NEAR(v, integrate_payoff(std::log(100.0), 0.04, deal), 1e-9);
    EXPECT_NEAR(v, 9.096153179, 1e-8);
    // at the martingale mean ln 100 - V/2 the value is the Black-Scholes price
    EXPECT_NEAR(gaussian_payoff_derivative(0, std::log(100.0) - 0.02, 0.04, deal), 7.965567455, 1e-8);
}

TEST(GaussianPayoff, AllPayoffsAgainstIntegration)
{
    for (auto kind : {PayoffKind::Call, PayoffKind::Put, PayoffKind::DigitalCall}) {
        for (double K : {70.0, 100.0, 135.0}) {
            const auto ld = log_deal(kind, K, 0.97, 1.02);
            EXPECT_NEAR(gaussian_payoff_derivative(0, std::log(100.0), 0.09, ld), integrate_payoff(std::log(100.0), 0.09, ld),
                        1e-9);
            const auto nd = normal_deal(kind, K, 0.97);
            EXPECT_NEAR(gaussian_payoff_derivative(0, 100.0, 400.0, nd), integrate_payoff(100.0, 400.0, nd), 1e-9);
        }
    }
}

TEST(GaussianPayoff, DigitalWithVanishingStrike)
{
    const auto deal = log_deal(PayoffKind::DigitalCall, 1e-12);
    EXPECT_DOUBLE_EQ(gaussian_payoff_derivative(0, 0.3, 0.5, deal), 1.0);
}

TEST(GaussianPayoff, Errors)
{
    const auto deal = log_deal(PayoffKind::Call, 100.0);
    EXPECT_THROW(gaussian_payoff_derivative(0, 4.6, 0.0, deal), DegenerateVariance);
    EXPECT_THROW(gaussian_payoff_derivative(0, 4.6, -1.0, deal), DegenerateVariance);
    EXPECT_THROW(gaussian_payoff_derivative(4, 4.6, 0.04, deal), UnsupportedOrder);
    const ProxyLaw law{4.6, 0.04, {}, 1.0};
    EXPECT_THROW(merton_greek(0, law, deal, false), UnsupportedOrder);
    EXPECT_THROW(merton_greek(4, law, deal, false), UnsupportedOrder);
}

TEST(MertonPrice, NoJumpsIsBlackScholes)
{
    const double T = 1.5, r = 0.03, vol = 0.22, S = 100.0, K = 110.0;
    const auto deal = log_deal(PayoffKind::Call, K, std::exp(-r * T), std::exp(r * T));
    const ProxyLaw law{std::log(S) - 0.5 * vol * vol * T, vol * vol * T, {}, T};
    SeriesInfo info;
    const double v = merton_price(law, deal, &info);
    EXPECT_EQ(info.terms, 1u);
    EXPECT_NEAR(v, black_price(PayoffKind::Call, S * std::exp(r * T), K, vol * std::sqrt(T), std::exp(-r * T)),
                1e-12);
}

TEST(MertonPrice, ClosedFormPoissonSumOfBlackPrices)
{
    // sum_i P(N=i) e^{-rT} BS(F e^{i(eta + gamma^2/2)} e^{-lambda T (E e^Y - 1)}, K, sqrt((V + i gamma^2)/T))
    const double S = 100.0, r = 0.04, T = 2.0, vol = 0.2;
    const JumpParams j{0.3, -0.08, 0.35};
    const double x0 = std::log(S);
    const double mu = j.compensator() - 0.5 * vol * vol;
    const double D = std::exp(-r * T), C = std::exp(r * T);
    for (double K : {70.0, 100.0, 150.0}) {
        const auto deal = log_deal(PayoffKind::Call, K, D, C);
        const ProxyLaw law{x0 + mu * T, vol * vol * T, j, T};
        double ref = 0.0, w = std::exp(-j.lambda * T);
        const double F = S * C * std::exp(j.compensator() * T);
        for (int i = 0; i < 80; ++i) {
            const double Fi = F * std::exp(i * (j.eta + 0.5 * j.gamma * j.gamma));
            ref += w * black_price(PayoffKind::Call, Fi, K, std::sqrt(vol * vol * T + i * j.gamma * j.gamma), D);
            w *= j.lambda * T / (i + 1);
        }
        EXPECT_NEAR(merton_price(law, deal), ref, 1e-11 * ref);
    }
}

TEST(MertonPrice, PutCallParity)
{
    const JumpParams j{0.5, -0.1, 0.25};
    const double D = 0.95, C = 1.03;
    const ProxyLaw law{std::log(100.0) - 0.03, 0.06, j, 1.0};
    // E[e^X] under the mixture
    const double ex = std::exp(law.base_mean + 0.5 * law.base_var + j.lambda * (j.exp_mean() - 1.0));
    for (double K : {60.0, 100.0, 140.0}) {
        const double c = merton_price(law, log_deal(PayoffKind::Call, K, D, C));
        const double p = merton_price(law, log_deal(PayoffKind::Put, K, D, C));
        EXPECT_NEAR(c - p, D * (C * ex - K), 1e-11 * K);
    }
}

TEST(MertonPrice, MonotoneInStrike)
{
    const ProxyLaw law{std::log(100.0), 0.05, {0.4, -0.1, 0.3}, 1.0};
    double prev_call = INFINITY, prev_digital = INFINITY;
    for (double K = 50.0; K <= 200.0; K += 5.0) {
        const double c = merton_price(law, log_deal(PayoffKind::Call, K));
        const double d = merton_price(law, log_deal(PayoffKind::DigitalCall, K));
        EXPECT_LT(c, prev_call);
        EXPECT_LE(d, prev_digital);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
        prev_call = c;
        prev_digital = d;
    }
}

TEST(MertonPrice, SeriesTruncation)
{
    SeriesInfo info;
    const ProxyLaw law{std::log(100.0), 0.04, {2.0, -0.05, 0.2}, 3.0};
    merton_price(law, log_deal(PayoffKind::Call, 100.0), &info);
    EXPECT_GE(info.mass, 1.0 - 1e-12);
    EXPECT_LT(info.terms, 60u);

    const ProxyLaw heavy{std::log(100.0), 0.04, {400.0, -0.001, 0.01}, 1.0};
    merton_price(heavy, log_deal(PayoffKind::Call, 100.0), &info);
    EXPECT_EQ(info.terms, 201u);
}

TEST(MertonGreek, NoJumpsReducesToSingleBucket)
{
    const JumpParams j{0.0, -0.1, 0.3};
    const ProxyLaw law{4.6, 0.05, j, 1.0};
    const auto deal = log_deal(PayoffKind::Call, 95.0);
    for (int i = 1; i <= 3; ++i) {
        EXPECT_EQ(merton_greek(i, law, deal, false), gaussian_payoff_derivative(i, 4.6, 0.05, deal));
        EXPECT_EQ(merton_greek(i, law, deal, true), gaussian_payoff_derivative(i, 4.6 - 0.1, 0.05 + 0.09, deal));
    }
}

TEST(MertonGreek, MatchesExtendedPrecisionFiniteDifferences)
{
    const auto r = fixtures::greek_sweep<fixtures::quad>(1234, 60);
    EXPECT_GE(r.cases, 500);
    EXPECT_EQ(r.failures, 0) << r.first_failure;
    RecordProperty("worst_relative_error", std::to_string(r.worst));
}

TEST(MertonGreek, QuadOracleAgreesWith50Digits)
{
    // same draws: the quad differences must track the 50-digit ones
    const auto ld = fixtures::greek_sweep<fixtures::quad>(99, 4);
    const auto mp = fixtures::greek_sweep<fixtures::mp50>(99, 4);
    ASSERT_EQ(ld.fd.size(), mp.fd.size());
    for (std::size_t i = 0; i < ld.fd.size(); ++i)
        EXPECT_LE(std::abs(ld.fd[i] - mp.fd[i]), 1e-9 * std::max(std::abs(mp.fd[i]), mp.scale[i])) << "case " << i;
}

TEST(MertonPrice, DoubleMatchesHighPrecisionReference)
{
    const JumpParams j{0.7, -0.12, 0.3};
    const ProxyLaw law{std::log(100.0) - 0.04, 0.08, j, 2.0};
    for (auto kind : {PayoffKind::Call, PayoffKind::Put, PayoffKind::DigitalCall}) {
        const auto deal = log_deal(kind, 90.0, 0.93, 1.04);
        const double ref = static_cast<double>(fixtures::mp_merton_price(law.base_mean, law.base_var, j, 2.0, deal));
        EXPECT_NEAR(merton_price(law, deal), ref, 1e-13 * std::max(1.0, std::abs(ref)));
    }
}

TEST(BlackBachelier, ParityAndVega)
{
    const double F = 105.0, K = 100.0, T = 2.0, vol = 0.3, D = 0.9;
    const double st = vol * std::sqrt(T);
    EXPECT_NEAR(black_price(PayoffKind::Call, F, K, st, D) - black_price(PayoffKind::Put, F, K, st, D), D * (F - K),
                1e-12);
    const double h = 1e-6;
    const double fd = (black_price(PayoffKind::Call, F, K, (vol + h) * std::sqrt(T), D) -
                       black_price(PayoffKind::Call, F, K, (vol - h) * std::sqrt(T), D)) /
                      (2 * h);
    EXPECT_NEAR(black_vega(F, K, T, vol, D), fd, 1e-6);

    const double nv = 20.0, ns = nv * std::sqrt(T);
    EXPECT_NEAR(bachelier_price(PayoffKind::Call, F, K, ns, D) - bachelier_price(PayoffKind::Put, F, K, ns, D),
                D * (F - K), 1e-12);
    const double nfd = (bachelier_price(PayoffKind::Call, F, K, (nv + h) * std::sqrt(T), D) -
                        bachelier_price(PayoffKind::Call, F, K, (nv - h) * std::sqrt(T), D)) /
                       (2 * h);
    EXPECT_NEAR(bachelier_vega(F, K, T, nv, D), nfd, 1e-6);
}
