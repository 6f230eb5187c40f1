// SPDX-License-Identifier: MIT
#pragma once

// Second-order expansion around the Merton proxy:
//
//   E[h(X_T)] ~ E[h(X^M_T)] + sum_i alpha_i G_i(X^M_T) + sum_i beta_i G_i(X^M_T + Y')
//
// The six coefficients depend only on sigma, sigma', mu, mu' at the proxy point
// and on the jump law. They can be built four ways: direct per-interval
// integration, the forward bucket recursion, Gauss-Legendre quadrature for
// smooth inputs, and the reduced (A, B) form of the log-asset model.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "jdexp/analytic.hpp"
#include "jdexp/curve.hpp"
#include "jdexp/errors.hpp"
#include "jdexp/model.hpp"
#include "jdexp/quadrature.hpp"

namespace jdexp {

struct ExpansionState {
    std::array<double, 3> alpha{};
    std::array<double, 3> beta{};
    double omega1 = 0.0;  ///< int_0^t sigma_s^2 ds
    double omega2 = 0.0;  ///< int_0^t mu_s ds
    double t = 0.0;

    friend bool operator==(const ExpansionState&, const ExpansionState&) = default;
};

/// Values of sigma, sigma', mu, mu' (at the proxy point) on one bucket.
struct BucketCoefficients {
    double sigma = 0.0;
    double dsigma = 0.0;
    double mu = 0.0;
    double dmu = 0.0;
};

/// Log-asset bucket: sigma = nu e^{(beta-1) x0}, mu = compensator - sigma^2/2.
inline BucketCoefficients cev_bucket(double nu, double beta, double x0, const JumpParams& jumps) noexcept
{
    const double skew = beta - 1.0;
    const double s = nu * std::exp(skew * x0);
    const double ds = skew * s;
    return {s, ds, jumps.compensator() - 0.5 * s * s, -s * ds};
}

/// One step of the bucket recursion: the state at T_i extended over (T_i, t_next]
/// with constant coefficients. Returns a new state.
inline ExpansionState extend(const ExpansionState& s, double t_next, const BucketCoefficients& c,
                             const JumpParams& j)
{
    const double dt = t_next - s.t;
    const double half_dt2 = 0.5 * dt * dt;
    const double half_dsq = 0.5 * (t_next * t_next - s.t * s.t);
    const double ss = c.sigma * c.dsigma;
    const double s2 = c.sigma * c.sigma;

    ExpansionState n;
    n.alpha[0] = s.alpha[0] + dt * c.dmu * s.omega2 + half_dt2 * c.mu * c.dmu;
    n.alpha[1] = s.alpha[1] + dt * (c.dmu * s.omega1 + ss * s.omega2) + half_dt2 * (s2 * c.dmu + c.mu * ss);
    n.alpha[2] = s.alpha[2] + dt * ss * s.omega1 + half_dt2 * s2 * ss;
    n.beta[0] = s.beta[0] + j.lambda * j.eta * half_dsq * c.dmu;
    n.beta[1] = s.beta[1] + j.lambda * half_dsq * (j.gamma * j.gamma * c.dmu + j.eta * ss);
    n.beta[2] = s.beta[2] + j.lambda * j.gamma * j.gamma * half_dsq * ss;
    n.omega1 = s.omega1 + dt * s2;
    n.omega2 = s.omega2 + dt * c.mu;
    n.t = t_next;
    return n;
}

/// Coefficients by exact integration of the step functions on their merged
/// grid, using backward tail sums for the inner integrals.
inline ExpansionState coefficients_direct(const PiecewiseCurve& sigma, const PiecewiseCurve& dsigma,
                                          const PiecewiseCurve& mu, const PiecewiseCurve& dmu,
                                          const JumpParams& jumps, double T)
{
    if (!(T > 0.0))
        throw InvalidArgument("horizon must be > 0");
    const auto grid = merged_grid({&sigma, &dsigma, &mu, &dmu}, T);
    const std::size_t n = grid.size();

    std::vector<double> tail_dmu(n, 0.0), tail_ss(n, 0.0);
    for (std::size_t k = n - 1; k > 0; --k) {
        const double dt = grid[k] - grid[k - 1];
        tail_dmu[k - 1] = tail_dmu[k] + dmu(grid[k]) * dt;
        tail_ss[k - 1] = tail_ss[k] + sigma(grid[k]) * dsigma(grid[k]) * dt;
    }

    ExpansionState out;
    double time_weighted_dmu = 0.0, time_weighted_ss = 0.0;
    double left = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double right = grid[k];
        const double dt = right - left;
        const double s = sigma(right), m = mu(right), dm = dmu(right);
        const double ss = s * dsigma(right);
        const double inner_dmu = 0.5 * dm * dt * dt + tail_dmu[k] * dt;  // int_bucket int_t^T mu'
        const double inner_ss = 0.5 * ss * dt * dt + tail_ss[k] * dt;    // int_bucket int_t^T sigma sigma'
        out.alpha[0] += m * inner_dmu;
        out.alpha[1] += s * s * inner_dmu + m * inner_ss;
        out.alpha[2] += s * s * inner_ss;
        const double t_moment = 0.5 * (right - left) * (right + left);
        time_weighted_dmu += dm * t_moment;
        time_weighted_ss += ss * t_moment;
        out.omega1 += s * s * dt;
        out.omega2 += m * dt;
        left = right;
    }
    const auto& j = jumps;
    out.beta[0] = j.lambda * j.eta * time_weighted_dmu;
    out.beta[1] = j.lambda * (j.gamma * j.gamma * time_weighted_dmu + j.eta * time_weighted_ss);
    out.beta[2] = j.lambda * j.gamma * j.gamma * time_weighted_ss;
    out.t = T;
    return out;
}

/// Forward bucket recursion on a grid shared by all four curves; T must be one
/// of the breakpoints.
inline ExpansionState coefficients_recursive(const PiecewiseCurve& sigma, const PiecewiseCurve& dsigma,
                                             const PiecewiseCurve& mu, const PiecewiseCurve& dmu,
                                             const JumpParams& jumps, double T)
{
    if (!same_grid(sigma, dsigma) || !same_grid(sigma, mu) || !same_grid(sigma, dmu))
        throw GridMismatch("recursion needs sigma, sigma', mu, mu' on one breakpoint grid");
    const auto times = sigma.times();
    ExpansionState state;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > T && !detail::nearly_same_time(times[i], T))
            break;
        state = extend(state, times[i],
                       {sigma.values()[i], dsigma.values()[i], mu.values()[i], dmu.values()[i]}, jumps);
        if (detail::nearly_same_time(times[i], T))
            return state;
    }
    throw GridMismatch("horizon is not a breakpoint of the shared grid");
}

/// Continuous coefficient functions of time (at the proxy point).
struct SmoothCoefficients {
    std::function<double(double)> sigma;
    std::function<double(double)> dsigma;
    std::function<double(double)> mu;
    std::function<double(double)> dmu;
};

inline constexpr int kDefaultQuadratureNodes = 32;

/// Nested integrals by Gauss-Legendre: outer rule on [0, T], inner tails
/// int_t^T tabulated at each outer node with the same rule on [t, T].
inline ExpansionState coefficients_quadrature(const SmoothCoefficients& f, const JumpParams& jumps, double T,
                                              int nodes = kDefaultQuadratureNodes)
{
    if (nodes < 2)
        throw InvalidArgument("quadrature needs at least 2 nodes");
    if (!(T > 0.0))
        throw InvalidArgument("horizon must be > 0");
    const auto outer = gauss_legendre(nodes, 0.0, T);
    const auto unit = gauss_legendre(nodes, 0.0, 1.0);
    auto ss = [&](double t) { return f.sigma(t) * f.dsigma(t); };

    ExpansionState out;
    double tw_dmu = 0.0, tw_ss = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double t = outer.nodes[k];
        const double w = outer.weights[k];
        const double len = T - t;
        double tail_dmu = 0.0, tail_ss = 0.0;
        for (int q = 0; q < nodes; ++q) {
            const double s = t + len * unit.nodes[q];
            tail_dmu += unit.weights[q] * f.dmu(s);
            tail_ss += unit.weights[q] * ss(s);
        }
        tail_dmu *= len;
        tail_ss *= len;
        const double sig = f.sigma(t), m = f.mu(t);
        out.alpha[0] += w * m * tail_dmu;
        out.alpha[1] += w * (sig * sig * tail_dmu + m * tail_ss);
        out.alpha[2] += w * sig * sig * tail_ss;
        tw_dmu += w * t * f.dmu(t);
        tw_ss += w * t * ss(t);
        out.omega1 += w * sig * sig;
        out.omega2 += w * m;
    }
    const auto& j = jumps;
    out.beta[0] = j.lambda * j.eta * tw_dmu;
    out.beta[1] = j.lambda * (j.gamma * j.gamma * tw_dmu + j.eta * tw_ss);
    out.beta[2] = j.lambda * j.gamma * j.gamma * tw_ss;
    out.t = T;
    return out;
}

/// Log-asset model: every coefficient is a combination of
/// A = int_0^T t sigma sigma' dt and B = int_0^T sigma^2 (int_t^T sigma sigma') dt.
inline ExpansionState coefficients_aa(const ModelSpec& model, double T)
{
    if (model.variant() != ModelVariant::LogAssetAA)
        throw InvalidArgument("reduced coefficients apply to the log-asset model only");
    if (!(T > 0.0))
        throw InvalidArgument("horizon must be > 0");
    const auto pc = proxy_curves(model, T);
    const auto grid = pc.sigma.times();
    const std::size_t n = grid.size();

    std::vector<double> tail(n, 0.0);
    for (std::size_t k = n - 1; k > 0; --k)
        tail[k - 1] = tail[k] + pc.sigma.values()[k] * pc.dsigma.values()[k] * (grid[k] - grid[k - 1]);

    double A = 0.0, B = 0.0;
    ExpansionState out;
    double left = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = grid[k] - left;
        const double s = pc.sigma.values()[k];
        const double ss = s * pc.dsigma.values()[k];
        A += ss * 0.5 * (grid[k] - left) * (grid[k] + left);
        B += s * s * (0.5 * ss * dt * dt + tail[k] * dt);
        out.omega1 += s * s * dt;
        out.omega2 += pc.mu.values()[k] * dt;
        left = grid[k];
    }
    const auto& j = model.jumps();
    const double c = j.lambda * std::expm1(j.eta + 0.5 * j.gamma * j.gamma);
    out.alpha = {0.5 * B + c * A, -1.5 * B - c * A, B};
    out.beta = {-j.lambda * j.eta * A, j.lambda * (j.eta - j.gamma * j.gamma) * A, j.lambda * j.gamma * j.gamma * A};
    out.t = T;
    return out;
}

struct PriceBreakdown {
    double merton_term = 0.0;
    double diffusion_correction = 0.0;
    double jump_correction = 0.0;
    double total = 0.0;
};

/// Expansion price from a coefficient state (the state's omegas define the proxy law).
inline PriceBreakdown price_from_state(const ExpansionState& state, double x0, const JumpParams& jumps,
                                       const DealTerms& deal)
{
    const ProxyLaw law{x0 + state.omega2, state.omega1, jumps, deal.payoff.maturity};
    PriceBreakdown out;
    out.merton_term = merton_price(law, deal);
    for (int i = 0; i < 3; ++i) {
        if (state.alpha[i] != 0.0)
            out.diffusion_correction += state.alpha[i] * merton_greek(i + 1, law, deal, false);
        if (state.beta[i] != 0.0)
            out.jump_correction += state.beta[i] * merton_greek(i + 1, law, deal, true);
    }
    out.total = out.merton_term + out.diffusion_correction + out.jump_correction;
    return out;
}

/// Coefficient state of the model at the horizon, through the bucket recursion.
inline ExpansionState expansion_state(const ModelSpec& model, double T)
{
    const auto pc = proxy_curves(model, T);
    for (double s : pc.sigma.values())
        if (!(s > 0.0))
            throw InvalidArgument("volatility at the proxy point must be > 0 on every bucket");
    return coefficients_recursive(pc.sigma, pc.dsigma, pc.mu, pc.dmu, model.jumps(), T);
}

/// Expansion price of a European payoff. T = 0 returns the intrinsic value h(x0).
inline PriceBreakdown approx_price(const ModelSpec& model, const Payoff& payoff)
{
    if (payoff.maturity == 0.0) {
        // evaluated on the asset level directly so that exp(ln spot) round-off does not leak in
        const DealTerms deal{1.0, 1.0, payoff, ModelVariant::NormalAsset};
        const double v = payoff_value(deal, model.env().spot);
        return {v, 0.0, 0.0, v};
    }
    payoff.validate();
    const double T = payoff.maturity;
    const auto state = expansion_state(model, T);
    return price_from_state(state, model.proxy_point(T), model.jumps(), make_deal(model, payoff));
}

/// Expansion price for smooth coefficient functions (quadrature engine).
inline PriceBreakdown approx_price_smooth(const SmoothCoefficients& coeffs, double x0, const JumpParams& jumps,
                                          const DealTerms& deal, int nodes = kDefaultQuadratureNodes)
{
    deal.payoff.validate();
    const auto state = coefficients_quadrature(coeffs, jumps, deal.payoff.maturity, nodes);
    return price_from_state(state, x0, jumps, deal);
}

/// Level constants of the error bounds and the three bound shapes (without
/// their unknown multiplicative constant: comparable across parameter sets only).
struct Diagnostics {
    double M0 = 0.0;
    double M1 = 0.0;
    double MJ = 0.0;
    double sigma_inf = 0.0;
    double diffusion_scale = 0.0;  ///< (M0 sqrt T)^2
    double jump_scale = 0.0;       ///< MJ^2 sqrt(lambda T)
    double smooth_envelope = 0.0;
    double vanilla_envelope = 0.0;
    double binary_envelope = 0.0;
};

inline Diagnostics diagnostics(const ModelSpec& model, double T)
{
    if (!(T > 0.0))
        throw InvalidArgument("horizon must be > 0");
    const auto grid = model.vol_grid(T);
    const auto& j = model.jumps();

    // sup-norms of sigma^(i) and mu^(i), i = 0..4, over the grid at x0
    std::array<double, 5> sup_sigma{}, sup_mu{};
    double inf_sigma = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const auto [s, ds] = eval_vol_at_proxy(model, t);
        const auto [m, dm] = eval_drift_at_proxy(model, t);
        inf_sigma = std::min(inf_sigma, s);
        sup_sigma[0] = std::max(sup_sigma[0], std::abs(s));
        sup_mu[0] = std::max(sup_mu[0], std::abs(m));
        if (model.variant() == ModelVariant::LogAssetAA) {
            // sigma^(i) = b^i sigma, (sigma^2)^(i) = (2b)^i sigma^2, mu^(i) = -(sigma^2)^(i) / 2
            const double b = model.cev().beta(t) - 1.0;
            double bi = 1.0, b2i = 1.0;
            for (int i = 1; i <= 4; ++i) {
                bi *= b;
                b2i *= 2.0 * b;
                sup_sigma[i] = std::max(sup_sigma[i], std::abs(bi * s));
                sup_mu[i] = std::max(sup_mu[i], std::abs(0.5 * b2i * s * s));
            }
        } else {
            sup_sigma[1] = std::max(sup_sigma[1], std::abs(ds));
            sup_mu[1] = std::max(sup_mu[1], std::abs(dm));
        }
    }

    Diagnostics d;
    for (int i = 1; i <= 4; ++i)
        d.M1 = std::max(d.M1, sup_sigma[i] + sup_mu[i]);
    d.M0 = std::max(d.M1, sup_sigma[0] + sup_mu[0]);
    d.MJ = j.size_constant();
    d.sigma_inf = inf_sigma;
    d.diffusion_scale = d.M0 * d.M0 * T;
    d.jump_scale = d.MJ * d.MJ * std::sqrt(j.lambda * T);
    const double core = d.diffusion_scale + d.jump_scale;
    d.smooth_envelope = d.M1 * std::sqrt(T) * core;
    d.vanilla_envelope = d.M1 == 0.0 ? 0.0 : d.smooth_envelope * d.M0 / inf_sigma;
    const double r = d.M1 == 0.0 ? 0.0 : d.M1 / inf_sigma;
    d.binary_envelope = (r + r * r) * core;
    return d;
}

}  // namespace jdexp
