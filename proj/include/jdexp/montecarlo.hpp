// SPDX-License-Identifier: MIT
#pragma once

// Euler reference pricer for dX = sigma(t, X-) dW + mu(t, X-) dt + dJ.
//
// Paths are grouped in fixed-size batches. Each batch owns an engine seeded
// from (seed, batch index) alone, and batch results are merged in batch order,
// so estimates are bit-identical for any thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "jdexp/analytic.hpp"
#include "jdexp/errors.hpp"
#include "jdexp/expansion.hpp"
#include "jdexp/model.hpp"

namespace jdexp {

enum class McScheme { Euler };

struct McConfig {
    std::uint64_t n_paths = 2'000'000;
    int n_steps_per_year = 250;
    std::uint64_t seed = 20080917;
    bool antithetic = true;
    McScheme scheme = McScheme::Euler;
    double budget = 1e10;  ///< cap on n_paths * n_steps
    unsigned threads = 0;  ///< 0: hardware concurrency
    bool freeze_at_proxy = false;  ///< simulate the Merton proxy instead of the full model
    bool control_variate = false;  ///< subtract the proxy payoff on the same draws, add its closed form back
    std::size_t batch_units = 2048;
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths_used = 0;
};

namespace detail {

struct McStep {
    double t_end;
    double dt;
    double sqrt_dt;
    double a;  // log-asset: nu; normal: sigma_t; frozen: sigma_t
    double b;  // log-asset: beta - 1; normal: sigma'_t; frozen: mu_t
    double proxy_sigma;
    double proxy_mu;
    int horizon = -1;  // index of the horizon reached at t_end, if any
};

inline std::vector<McStep> build_steps(const ModelSpec& model, std::span<const double> horizons,
                                       int steps_per_year, bool frozen)
{
    const double last = *std::max_element(horizons.begin(), horizons.end());
    auto knots = model.vol_grid(last);
    for (double h : horizons)
        knots.push_back(h);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(), nearly_same_time), knots.end());

    std::vector<McStep> steps;
    double left = 0.0;
    for (double right : knots) {
        const double len = right - left;
        if (len <= 0.0)
            continue;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len * steps_per_year - 1e-9)));
        const double dt = len / static_cast<double>(n);
        // coefficients of the interval (left, right]
        double a = 0.0, b = 0.0;
        const double ps = eval_vol_at_proxy(model, right).sigma;
        const double pm = eval_drift_at_proxy(model, right).mu;
        if (frozen) {
            a = ps;
            b = pm;
        } else if (model.variant() == ModelVariant::LogAssetAA) {
            a = model.cev().nu(right);
            b = model.cev().beta(right) - 1.0;
        } else {
            a = model.explicit_vol().sigma(right);
            b = model.explicit_vol().dsigma(right);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double t_end = (i + 1 == n) ? right : left + dt * static_cast<double>(i + 1);
            steps.push_back({t_end, dt, std::sqrt(dt), a, b, ps, pm, -1});
        }
        for (std::size_t h = 0; h < horizons.size(); ++h)
            if (nearly_same_time(horizons[h], right))
                steps.back().horizon = static_cast<int>(h);
        left = right;
    }
    return steps;
}

}  // namespace detail

/// Terminal values of one batch; `x[h]` holds members * units values (pair
/// members adjacent), `jumps[h]` one count per unit. `proxy[h]` mirrors `x[h]`
/// for the Merton proxy driven by the same draws (control-variate runs only).
struct TerminalBatch {
    std::size_t first_unit = 0;
    std::size_t units = 0;
    int members = 1;
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> proxy;
    std::vector<std::vector<std::uint32_t>> jumps;
};

inline std::size_t mc_units(const McConfig& cfg) noexcept
{
    return cfg.antithetic ? std::max<std::uint64_t>(cfg.n_paths / 2, 1) : std::max<std::uint64_t>(cfg.n_paths, 1);
}

/// Total Euler steps needed to reach the largest horizon.
inline std::size_t mc_step_count(const ModelSpec& model, std::span<const double> horizons, const McConfig& cfg)
{
    return detail::build_steps(model, horizons, cfg.n_steps_per_year, cfg.freeze_at_proxy).size();
}

/// Simulates all horizons in one pass and hands each batch to `on_batch(index, batch)`,
/// possibly from several threads at once (one call per batch index).
template <class OnBatch>
void simulate_batches(const ModelSpec& model, std::span<const double> horizons, const McConfig& cfg,
                      OnBatch&& on_batch)
{
    if (horizons.empty())
        throw InvalidArgument("no simulation horizon");
    for (double h : horizons)
        if (!(h > 0.0))
            throw InvalidArgument("simulation horizons must be > 0");
    if (cfg.n_steps_per_year < 1 || cfg.n_paths < 1)
        throw InvalidArgument("Monte Carlo needs at least one path and one step per year");

    const auto steps = detail::build_steps(model, horizons, cfg.n_steps_per_year, cfg.freeze_at_proxy);
    const std::size_t units = mc_units(cfg);
    const int members = cfg.antithetic ? 2 : 1;
    if (static_cast<double>(units) * members * static_cast<double>(steps.size()) > cfg.budget)
        throw BudgetExceeded("paths x steps exceeds the configured Monte Carlo budget");

    const bool log_model = model.variant() == ModelVariant::LogAssetAA;
    const bool frozen = cfg.freeze_at_proxy;
    const bool with_proxy = cfg.control_variate;
    const auto& j = model.jumps();
    const double compensator = j.compensator();
    const double normal_drift = -j.lambda * j.eta;
    // normal-asset paths are simulated as Y = X - x0(T) and shifted per horizon
    const double x_start = log_model ? model.proxy_point(0.0) : 0.0;
    std::vector<double> shift(horizons.size(), 0.0);
    if (!log_model)
        for (std::size_t h = 0; h < horizons.size(); ++h)
            shift[h] = model.proxy_point(horizons[h]);

    const std::size_t batch_units = std::max<std::size_t>(cfg.batch_units, 1);
    const std::size_t n_batches = (units + batch_units - 1) / batch_units;

    auto run_batch = [&](std::size_t b) {
        TerminalBatch out;
        out.first_unit = b * batch_units;
        out.units = std::min(batch_units, units - out.first_unit);
        out.members = members;
        out.x.assign(horizons.size(), std::vector<double>(out.units * members));
        out.jumps.assign(horizons.size(), std::vector<std::uint32_t>(out.units));
        if (with_proxy)
            out.proxy.assign(horizons.size(), std::vector<double>(out.units * members));

        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 eng(seq);
        std::normal_distribution<double> gauss;
        std::exponential_distribution<double> wait(j.lambda > 0.0 ? j.lambda : 1.0);

        for (std::size_t u = 0; u < out.units; ++u) {
            double x[2] = {x_start, x_start};
            double xp[2] = {x_start, x_start};
            std::uint32_t count = 0;
            double next_jump = j.lambda > 0.0 ? wait(eng) : std::numeric_limits<double>::infinity();
            for (const auto& st : steps) {
                const double z = gauss(eng);
                for (int m = 0; m < members; ++m) {
                    const double dw = (m == 0 ? z : -z) * st.sqrt_dt;
                    double& xm = x[m];
                    if (frozen) {
                        xm += st.a * dw + st.b * st.dt;
                    } else if (log_model) {
                        const double s = st.b == 0.0 ? st.a : st.a * std::exp(st.b * xm);
                        xm += s * dw + (compensator - 0.5 * s * s) * st.dt;
                    } else {
                        xm += (st.a + st.b * xm) * dw + normal_drift * st.dt;
                    }
                    if (with_proxy)
                        xp[m] += st.proxy_sigma * dw + st.proxy_mu * st.dt;
                }
                while (next_jump <= st.t_end) {
                    const double y = j.eta + j.gamma * gauss(eng);
                    for (int m = 0; m < members; ++m) {
                        x[m] += y;
                        xp[m] += y;
                    }
                    ++count;
                    next_jump += wait(eng);
                }
                if (st.horizon >= 0) {
                    const auto h = static_cast<std::size_t>(st.horizon);
                    for (int m = 0; m < members; ++m)
                        out.x[h][u * members + m] = x[m] + shift[h];
                    if (with_proxy)
                        for (int m = 0; m < members; ++m)
                            out.proxy[h][u * members + m] = xp[m] + shift[h];
                    out.jumps[h][u] = count;
                }
            }
        }
        on_batch(b, out);
    };

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_batches));
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b)
            run_batch(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t b = next++; b < n_batches; b = next++)
                run_batch(b);
        });
}

/// Running mean / second central moment; merged in a fixed order.
struct MomentAccumulator {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) noexcept
    {
        count += 1.0;
        const double d = v - mean;
        mean += d / count;
        m2 += d * (v - mean);
    }

    void merge(const MomentAccumulator& o) noexcept
    {
        if (o.count == 0.0)
            return;
        const double n = count + o.count;
        const double d = o.mean - mean;
        mean += d * o.count / n;
        m2 += o.m2 + d * d * count * o.count / n;
        count = n;
    }

    [[nodiscard]] double variance() const noexcept { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
    [[nodiscard]] double std_error() const noexcept { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

struct TerminalSample {
    std::vector<double> values;        ///< one per path, pair members adjacent
    std::vector<std::uint32_t> jumps;  ///< jump count per path
    bool antithetic = false;
};

/// Terminal values X_T of every simulated path.
inline TerminalSample simulate_terminal(const ModelSpec& model, double T, const McConfig& cfg)
{
    if (!(T > 0.0))
        throw InvalidArgument("maturity must be > 0");
    const std::size_t units = mc_units(cfg);
    const int members = cfg.antithetic ? 2 : 1;
    TerminalSample out;
    out.antithetic = cfg.antithetic;
    out.values.resize(units * members);
    out.jumps.resize(units * members);
    const double horizon[1] = {T};
    simulate_batches(model, horizon, cfg, [&](std::size_t, const TerminalBatch& b) {
        std::copy(b.x[0].begin(), b.x[0].end(), out.values.begin() + static_cast<std::ptrdiff_t>(b.first_unit * members));
        for (std::size_t u = 0; u < b.units; ++u)
            for (int m = 0; m < members; ++m)
                out.jumps[(b.first_unit + u) * members + m] = b.jumps[0][u];
    });
    return out;
}

/// Prices several payoffs (any maturities) on the same paths.
inline std::vector<McEstimate> mc_price_many(const ModelSpec& model, std::span<const Payoff> payoffs,
                                             const McConfig& cfg)
{
    std::vector<double> horizons;
    std::vector<std::size_t> horizon_of;
    for (const auto& p : payoffs) {
        p.validate();
        auto it = std::find_if(horizons.begin(), horizons.end(),
                               [&](double h) { return detail::nearly_same_time(h, p.maturity); });
        if (it == horizons.end()) {
            horizons.push_back(p.maturity);
            horizon_of.push_back(horizons.size() - 1);
        } else {
            horizon_of.push_back(static_cast<std::size_t>(it - horizons.begin()));
        }
    }
    if (payoffs.empty())
        return {};
    std::vector<DealTerms> deals;
    std::vector<double> proxy_value(payoffs.size(), 0.0);
    for (std::size_t k = 0; k < payoffs.size(); ++k) {
        deals.push_back(make_deal(model, payoffs[k]));
        if (cfg.control_variate)
            proxy_value[k] = approx_price(model, payoffs[k]).merton_term;
    }

    const std::size_t batch_units = std::max<std::size_t>(cfg.batch_units, 1);
    const std::size_t n_batches = (mc_units(cfg) + batch_units - 1) / batch_units;
    std::vector<std::vector<MomentAccumulator>> partial(n_batches, std::vector<MomentAccumulator>(payoffs.size()));

    simulate_batches(model, horizons, cfg, [&](std::size_t b, const TerminalBatch& batch) {
        auto& acc = partial[b];
        for (std::size_t k = 0; k < payoffs.size(); ++k) {
            const auto& xs = batch.x[horizon_of[k]];
            for (std::size_t u = 0; u < batch.units; ++u) {
                double v = 0.0;
                for (int m = 0; m < batch.members; ++m) {
                    const std::size_t i = u * batch.members + m;
                    v += payoff_value(deals[k], xs[i]);
                    if (cfg.control_variate)
                        v -= payoff_value(deals[k], batch.proxy[horizon_of[k]][i]);
                }
                acc[k].add(v / batch.members);
            }
        }
    });

    std::vector<McEstimate> out(payoffs.size());
    for (std::size_t k = 0; k < payoffs.size(); ++k) {
        MomentAccumulator total;
        for (const auto& p : partial)
            total.merge(p[k]);
        out[k] = {total.mean + proxy_value[k], total.std_error(), static_cast<std::uint64_t>(total.count) * (cfg.antithetic ? 2u : 1u)};
    }
    return out;
}

inline McEstimate mc_price(const ModelSpec& model, const Payoff& payoff, const McConfig& cfg)
{
    return mc_price_many(model, std::span<const Payoff>(&payoff, 1), cfg).front();
}

}  // namespace jdexp
