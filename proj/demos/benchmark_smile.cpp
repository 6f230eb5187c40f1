// SPDX-License-Identifier: MIT
//
// Implied-vol smile of a 20-bucket CEV jump-diffusion model, expansion vs a short Monte Carlo run.

#include <cstdio>
#include <vector>

#include "jdexp/jdexp.hpp"

int main()
{
    using namespace jdexp;

    std::vector<double> times, nu, beta;
    for (int i = 0; i < 20; ++i) {
        times.push_back((i + 1) / 20.0);
        nu.push_back(0.25 - i * 0.0011);
        beta.push_back(1.0 - i * 0.0075);
    }
    MarketEnv env;
    env.spot = 100.0;
    env.rate = PiecewiseCurve::constant(0.04);
    const auto model = ModelSpec::log_aa({PiecewiseCurve(times, nu), PiecewiseCurve(times, beta)},
                                         JumpParams{0.3, -0.08, 0.35}, env);

    McConfig mc;
    mc.n_paths = 200'000;
    mc.control_variate = true;

    const double T = 1.0;
    const double F = env.forward(T);
    const std::vector<double> rel{0.7, 0.85, 1.0, 1.2, 1.5};
    std::vector<Payoff> payoffs;
    for (double k : rel)
        payoffs.push_back({k * env.spot >= F ? PayoffKind::Call : PayoffKind::Put, k * env.spot, T});
    const auto estimates = mc_price_many(model, payoffs, mc);

    std::printf("%8s %10s %10s %10s %8s\n", "K/S", "expansion", "mc", "diff_bp", "se_bp");
    for (std::size_t i = 0; i < rel.size(); ++i) {
        const auto& p = payoffs[i];
        const double k = rel[i], K = p.strike;
        const auto deal = make_deal(model, p);
        const double iv_exp = implied_vol(approx_price(model, p).total, deal, F);
        const auto& est = estimates[i];
        const double iv_mc = implied_vol(est.price, deal, F);
        const double se = est.std_error / black_vega(F, K, T, iv_mc, deal.discount);
        std::printf("%8.2f %10.6f %10.6f %10.3f %8.3f\n", k, iv_exp, iv_mc, (iv_exp - iv_mc) * 1e4, se * 1e4);
    }

    const auto d = diagnostics(model, T);
    std::printf("M0 %.6g  M1 %.6g  MJ %.6g\n", d.M0, d.M1, d.MJ);
    return 0;
}
