// SPDX-License-Identifier: MIT
#pragma once

// Bootstrap calibration of the log-asset model to an implied-vol surface.
//
// For fixed jumps, maturities are fitted one at a time: bucket i only moves
// (nu_i, beta_i), and the expansion state at T_{i-1} is extended by a single
// recursion step per trial point. Jumps are fitted by an outer LM whose
// residual vector is the full-surface output of that inner bootstrap.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "jdexp/analytic.hpp"
#include "jdexp/curve.hpp"
#include "jdexp/errors.hpp"
#include "jdexp/expansion.hpp"
#include "jdexp/implied_vol.hpp"
#include "jdexp/levenberg_marquardt.hpp"
#include "jdexp/model.hpp"

namespace jdexp {

/// Failure of the very first bucket evaluation: nothing can be calibrated.
class CalibrationFailure : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "calibration_failure"; }
};

struct VolQuote {
    double maturity = 0.0;
    double strike = 0.0;
    double vol = 0.0;
};

struct VolSurface {
    std::vector<VolQuote> quotes;
    double spot = 1.0;
    PiecewiseCurve rate = PiecewiseCurve::constant(0.0);
    PiecewiseCurve dividend = PiecewiseCurve::constant(0.0);

    void validate() const
    {
        if (quotes.empty())
            throw InvalidArgument("volatility surface has no quotes");
        if (!(spot > 0.0))
            throw InvalidArgument("spot must be > 0");
        for (std::size_t i = 0; i < quotes.size(); ++i) {
            const auto& q = quotes[i];
            if (!(q.maturity > 0.0) || !(q.strike > 0.0) || !(q.vol > 0.0) || !std::isfinite(q.vol))
                throw InvalidArgument("quotes need maturity > 0, strike > 0 and vol > 0");
            if (i > 0 && q.maturity < quotes[i - 1].maturity)
                throw InvalidArgument("quotes must be sorted by ascending maturity");
        }
    }

    [[nodiscard]] MarketEnv env() const { return {spot, rate, dividend}; }

    /// Distinct maturities, ascending.
    [[nodiscard]] std::vector<double> maturities() const
    {
        std::vector<double> out;
        for (const auto& q : quotes)
            if (out.empty() || !detail::nearly_same_time(out.back(), q.maturity))
                out.push_back(q.maturity);
        return out;
    }

    /// Quotes grouped per maturity, in input order.
    [[nodiscard]] std::vector<std::vector<VolQuote>> by_maturity() const
    {
        std::vector<std::vector<VolQuote>> out;
        for (const auto& q : quotes) {
            if (out.empty() || !detail::nearly_same_time(out.back().front().maturity, q.maturity))
                out.emplace_back();
            out.back().push_back(q);
        }
        return out;
    }
};

struct CalibBounds {
    double nu_lower = 1e-4, nu_upper = 50.0;  ///< applied to the local vol at spot, nu e^{(beta-1) ln spot}
    double beta_lower = -1.0, beta_upper = 3.0;
    double lambda_lower = 0.0, lambda_upper = 3.0;
    double eta_lower = -1.0, eta_upper = 1.0;
    double gamma_lower = 0.0, gamma_upper = 1.5;

    void validate() const
    {
        if (!(nu_lower > 0.0 && nu_lower <= nu_upper) || !(beta_lower <= beta_upper) ||
            !(lambda_lower >= 0.0 && lambda_lower <= lambda_upper) || !(eta_lower <= eta_upper) ||
            !(gamma_lower >= 0.0 && gamma_lower <= gamma_upper))
            throw InvalidArgument("calibration bounds must be ordered with lambda, gamma >= 0 and nu > 0");
    }
};

struct OuterConfig {
    int max_iter = 30;
    double tol = 1e-12;
};

struct CalibConfig {
    JumpParams jump_init{0.05, -0.10, 0.30};
    bool calibrate_jumps = true;
    CalibBounds bounds;
    LmConfig lm;
    OuterConfig outer;
    int restarts = 0;  ///< extra outer starts drawn by Latin hypercube inside the jump bounds
    std::uint64_t restart_seed = 7;
};

struct BucketFit {
    double nu = 0.0;
    double beta = 1.0;
    ExpansionState state;
    std::vector<double> model_vols;
    std::vector<double> residuals;  ///< model - market, absolute vol
    bool degraded = false;
    bool beta_frozen = false;
};

namespace detail {

/// Model implied vol of one quote from an expansion state at its maturity.
inline double model_vol(const ExpansionState& state, double x0, const JumpParams& jumps, const MarketEnv& env,
                        double strike)
{
    const double T = state.t;
    const double F = env.forward(T);
    const Payoff payoff{strike >= F ? PayoffKind::Call : PayoffKind::Put, strike, T};
    const DealTerms deal{env.discount(T), env.carry(T), payoff, ModelVariant::LogAssetAA};
    const double price = price_from_state(state, x0, jumps, deal).total;
    return implied_vol(price, deal, F);
}

}  // namespace detail

/// Fits (nu_i, beta_i) of one maturity bucket on top of `state_in` (the exact
/// state at the previous maturity). `init` is the starting point; with fewer
/// than two quotes beta is frozen at init.beta.
inline BucketFit fit_bucket(const std::vector<VolQuote>& quotes, const ExpansionState& state_in,
                            const MarketEnv& env, const JumpParams& jumps, const CalibConfig& config,
                            std::pair<double, double> init)
{
    if (quotes.empty())
        throw InvalidArgument("bucket has no quotes");
    const double T = quotes.front().maturity;
    if (!(T > state_in.t))
        throw InvalidArgument("bucket maturity must follow the incoming state");
    const double x0 = std::log(env.spot);
    const bool freeze_beta = quotes.size() < 2;
    const auto& b = config.bounds;

    auto state_for = [&](double nu, double beta) {
        return extend(state_in, T, cev_bucket(nu, beta, x0, jumps), jumps);
    };
    auto residuals_at = [&](double nu, double beta, std::vector<double>* vols) {
        const auto st = state_for(nu, beta);
        std::vector<double> r;
        r.reserve(quotes.size());
        for (const auto& q : quotes) {
            const double v = detail::model_vol(st, x0, jumps, env, q.strike);
            if (vols)
                vols->push_back(v);
            r.push_back(v - q.vol);
        }
        return r;
    };

    // LM runs on (sigma at spot, beta): nu and beta alone form a curved valley
    // because sigma = nu e^{(beta-1) x} with x = ln spot far from zero
    auto nu_of = [&](double level, double beta) { return level * std::exp(-(beta - 1.0) * x0); };
    auto level_of = [&](double nu, double beta) { return nu * std::exp((beta - 1.0) * x0); };
    const double beta_fixed = init.second;
    const double level_init = std::clamp(level_of(init.first, init.second), b.nu_lower, b.nu_upper);
    Box box = freeze_beta ? Box{{b.nu_lower}, {b.nu_upper}} : Box{{b.nu_lower, b.beta_lower}, {b.nu_upper, b.beta_upper}};
    std::vector<double> x0v = freeze_beta ? std::vector<double>{level_init}
                                          : std::vector<double>{level_init, init.second};
    ResidualFn fn = [&](std::span<const double> x) {
        const double beta = freeze_beta ? beta_fixed : x[1];
        return residuals_at(nu_of(x[0], beta), beta, nullptr);
    };

    BucketFit fit;
    fit.beta_frozen = freeze_beta;
    try {
        const auto lm = levenberg_marquardt(fn, x0v, box, config.lm);
        fit.beta = freeze_beta ? beta_fixed : lm.x[1];
        fit.nu = nu_of(lm.x[0], fit.beta);
        fit.degraded = lm.status == LmStatus::MaxIterations;
    } catch (const LmStartFailure&) {
        fit.beta = freeze_beta ? beta_fixed : std::clamp(init.second, b.beta_lower, b.beta_upper);
        fit.nu = nu_of(level_init, fit.beta);
        fit.degraded = true;
    }
    fit.state = state_for(fit.nu, fit.beta);
    try {
        fit.residuals = residuals_at(fit.nu, fit.beta, &fit.model_vols);
    } catch (const Error&) {
        fit.model_vols.assign(quotes.size(), std::numeric_limits<double>::quiet_NaN());
        fit.residuals = fit.model_vols;
        fit.degraded = true;
    }
    return fit;
}

/// Sequential fit of every maturity bucket for fixed jumps.
struct BootstrapOutcome {
    std::vector<BucketFit> buckets;
    std::vector<double> residuals;  ///< all quotes, surface order
};

inline BootstrapOutcome bootstrap(const VolSurface& surface, const JumpParams& jumps, const CalibConfig& config)
{
    const auto groups = surface.by_maturity();
    const auto env = surface.env();
    BootstrapOutcome out;
    ExpansionState state;
    std::pair<double, double> init{0.0, 1.0};
    {
        // first bucket starts at (ATM vol, 1): the quote closest to the forward
        const auto& g = groups.front();
        const double F = env.forward(g.front().maturity);
        const auto atm = std::min_element(g.begin(), g.end(), [&](const VolQuote& a, const VolQuote& b) {
            return std::abs(std::log(a.strike / F)) < std::abs(std::log(b.strike / F));
        });
        init.first = atm->vol;
    }
    for (const auto& g : groups) {
        auto fit = fit_bucket(g, state, env, jumps, config, init);
        if (out.buckets.empty() && std::any_of(fit.residuals.begin(), fit.residuals.end(),
                                               [](double r) { return !std::isfinite(r); }))
            throw CalibrationFailure("first maturity bucket could not be priced");
        state = fit.state;
        init = {fit.nu, fit.beta};
        out.residuals.insert(out.residuals.end(), fit.residuals.begin(), fit.residuals.end());
        out.buckets.push_back(std::move(fit));
    }
    return out;
}

struct CalibrationResult {
    JumpParams jumps;
    PiecewiseCurve nu;
    PiecewiseCurve beta;
    MarketEnv env;
    std::vector<double> maturities;
    std::vector<std::vector<double>> strikes;
    std::vector<std::vector<double>> market_vols;
    std::vector<std::vector<double>> model_vols;
    std::vector<std::vector<double>> residuals_bp;  ///< (model - market) * 1e4, one row per maturity
    std::vector<double> objective_trace;            ///< outer LM objective (sum of squared vol residuals)
    std::vector<bool> degraded_buckets;
    bool outer_converged = true;
    double wall_time_seconds = 0.0;

    [[nodiscard]] ModelSpec model() const { return ModelSpec::log_aa({nu, beta}, jumps, env); }

    [[nodiscard]] double max_abs_residual_bp() const
    {
        double m = 0.0;
        for (const auto& row : residuals_bp)
            for (double v : row)
                m = std::max(m, std::isnan(v) ? std::numeric_limits<double>::infinity() : std::abs(v));
        return m;
    }

    [[nodiscard]] double objective() const
    {
        double s = 0.0;
        for (const auto& row : residuals_bp)
            for (double v : row)
                s += (v * 1e-4) * (v * 1e-4);
        return s;
    }
};

namespace detail {

inline std::vector<std::array<double, 3>> latin_hypercube(int k, const CalibBounds& b, std::uint64_t seed)
{
    std::vector<std::array<double, 3>> pts(static_cast<std::size_t>(k));
    if (k <= 0)
        return pts;
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u01;
    const std::array<std::pair<double, double>, 3> range{
        {{b.lambda_lower, b.lambda_upper}, {b.eta_lower, b.eta_upper}, {b.gamma_lower, b.gamma_upper}}};
    for (std::size_t d = 0; d < 3; ++d) {
        std::vector<int> perm(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), eng);
        for (int i = 0; i < k; ++i) {
            const double frac = (perm[static_cast<std::size_t>(i)] + u01(eng)) / k;
            pts[static_cast<std::size_t>(i)][d] = range[d].first + frac * (range[d].second - range[d].first);
        }
    }
    return pts;
}

}  // namespace detail

inline CalibrationResult bootstrap_calibrate(const VolSurface& surface, const CalibConfig& config = {})
{
    const auto start = std::chrono::steady_clock::now();
    surface.validate();
    config.bounds.validate();
    const auto& b = config.bounds;

    JumpParams jumps = config.jump_init;
    jumps.validate();
    std::vector<double> trace;
    bool outer_converged = true;

    if (config.calibrate_jumps) {
        ResidualFn outer = [&](std::span<const double> x) {
            return bootstrap(surface, JumpParams{x[0], x[1], x[2]}, config).residuals;
        };
        const Box box{{b.lambda_lower, b.eta_lower, b.gamma_lower}, {b.lambda_upper, b.eta_upper, b.gamma_upper}};
        LmConfig lm = config.lm;
        lm.max_iter = config.outer.max_iter;
        lm.grad_tol = config.outer.tol;

        std::vector<std::array<double, 3>> starts{{jumps.lambda, jumps.eta, jumps.gamma}};
        for (const auto& p : detail::latin_hypercube(config.restarts, b, config.restart_seed))
            starts.push_back(p);

        std::optional<LmResult> best;
        for (const auto& s : starts) {
            try {
                auto r = levenberg_marquardt(outer, {s[0], s[1], s[2]}, box, lm);
                if (!best || r.objective < best->objective)
                    best = std::move(r);
            } catch (const LmStartFailure&) {
            }
        }
        if (!best)
            throw CalibrationFailure("no outer starting point produced a full bootstrap");
        jumps = {best->x[0], best->x[1], best->x[2]};
        trace = best->trace;
        outer_converged = best->converged() || best->status == LmStatus::DampingExhausted;
    }

    BootstrapOutcome boot;
    try {
        boot = bootstrap(surface, jumps, config);
    } catch (const Error& e) {
        throw CalibrationFailure(std::string("first bucket could not be evaluated: ") + e.what());
    }

    CalibrationResult res;
    res.jumps = jumps;
    res.env = surface.env();
    res.maturities = surface.maturities();
    const auto groups = surface.by_maturity();
    std::vector<double> nu, beta;
    double obj = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& fit = boot.buckets[i];
        nu.push_back(fit.nu);
        beta.push_back(fit.beta);
        std::vector<double> k, mkt, bp;
        for (std::size_t q = 0; q < groups[i].size(); ++q) {
            k.push_back(groups[i][q].strike);
            mkt.push_back(groups[i][q].vol);
            bp.push_back(fit.residuals[q] * 1e4);
            obj += fit.residuals[q] * fit.residuals[q];
        }
        res.strikes.push_back(std::move(k));
        res.market_vols.push_back(std::move(mkt));
        res.model_vols.push_back(fit.model_vols);
        res.residuals_bp.push_back(std::move(bp));
        res.degraded_buckets.push_back(fit.degraded);
    }
    res.nu = PiecewiseCurve(res.maturities, std::move(nu));
    res.beta = PiecewiseCurve(res.maturities, std::move(beta));
    res.objective_trace = trace.empty() ? std::vector<double>{obj} : trace;
    res.outer_converged = outer_converged;
    res.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace jdexp
