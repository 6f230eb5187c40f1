// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <optional>
#include <variant>

#include "jdexp/curve.hpp"
#include "jdexp/errors.hpp"

namespace jdexp {

enum class ModelVariant { LogAssetAA, NormalAsset };

/// Compound Poisson jumps with N(eta, gamma^2) sizes.
struct JumpParams {
    double lambda = 0.0;
    double eta = 0.0;
    double gamma = 0.0;

    void validate() const
    {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw InvalidArgument("jump intensity must be finite and >= 0");
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw InvalidArgument("jump volatility must be finite and >= 0");
        if (!std::isfinite(eta))
            throw InvalidArgument("mean jump size must be finite");
    }

    /// E[e^Y] for one jump.
    [[nodiscard]] double exp_mean() const noexcept { return std::exp(eta + 0.5 * gamma * gamma); }

    /// Drift that makes e^{X} a martingale in the log-asset model: lambda (1 - E[e^Y]).
    [[nodiscard]] double compensator() const noexcept { return -lambda * std::expm1(eta + 0.5 * gamma * gamma); }

    /// Size constant |eta| + gamma used by the error envelopes.
    [[nodiscard]] double size_constant() const noexcept { return std::abs(eta) + gamma; }

    friend bool operator==(const JumpParams&, const JumpParams&) = default;
};

/// sigma(t, x) = nu(t) exp((beta(t) - 1) x)
struct CevLocalVol {
    PiecewiseCurve nu;
    PiecewiseCurve beta;
};

/// Explicit proxy-point volatility and its spatial derivative (normal-asset model).
struct ProxyVolCurves {
    PiecewiseCurve sigma;
    PiecewiseCurve dsigma;
};

struct MarketEnv {
    double spot = 1.0;
    PiecewiseCurve rate = PiecewiseCurve::constant(0.0);
    PiecewiseCurve dividend = PiecewiseCurve::constant(0.0);

    [[nodiscard]] double discount(double T) const noexcept { return std::exp(-rate.integral(0.0, T)); }
    [[nodiscard]] double carry(double T) const noexcept
    {
        return std::exp(rate.integral(0.0, T) - dividend.integral(0.0, T));
    }
    [[nodiscard]] double forward(double T) const noexcept { return spot * carry(T); }
};

class ModelSpec {
public:
    using LocalVol = std::variant<CevLocalVol, ProxyVolCurves>;

    static ModelSpec log_aa(CevLocalVol vol, JumpParams jumps, MarketEnv env)
    {
        for (double v : vol.nu.values())
            if (!(v > 0.0))
                throw InvalidArgument("nu must be strictly positive");
        return ModelSpec(std::move(vol), jumps, std::move(env));
    }

    static ModelSpec normal(ProxyVolCurves vol, JumpParams jumps, MarketEnv env)
    {
        return ModelSpec(std::move(vol), jumps, std::move(env));
    }

    [[nodiscard]] ModelVariant variant() const noexcept
    {
        return std::holds_alternative<CevLocalVol>(vol_) ? ModelVariant::LogAssetAA : ModelVariant::NormalAsset;
    }
    [[nodiscard]] const LocalVol& local_vol() const noexcept { return vol_; }
    [[nodiscard]] const CevLocalVol& cev() const { return std::get<CevLocalVol>(vol_); }
    [[nodiscard]] const ProxyVolCurves& explicit_vol() const { return std::get<ProxyVolCurves>(vol_); }
    [[nodiscard]] const JumpParams& jumps() const noexcept { return jumps_; }
    [[nodiscard]] const MarketEnv& env() const noexcept { return env_; }

    /// x0: ln(spot) for the log-asset model, the T-forward for the normal model.
    [[nodiscard]] double proxy_point(double T) const noexcept
    {
        return variant() == ModelVariant::LogAssetAA ? std::log(env_.spot) : env_.forward(T);
    }

    [[nodiscard]] ModelSpec with_jumps(JumpParams j) const
    {
        ModelSpec m = *this;
        j.validate();
        m.jumps_ = j;
        return m;
    }

    /// Breakpoints of the local-vol curves (not the rate curves).
    [[nodiscard]] std::vector<double> vol_grid(double horizon) const
    {
        if (variant() == ModelVariant::LogAssetAA)
            return merged_grid({&cev().nu, &cev().beta}, horizon);
        return merged_grid({&explicit_vol().sigma, &explicit_vol().dsigma}, horizon);
    }

private:
    ModelSpec(LocalVol vol, JumpParams jumps, MarketEnv env)
        : vol_(std::move(vol)), jumps_(jumps), env_(std::move(env))
    {
        jumps_.validate();
        if (!(env_.spot > 0.0) || !std::isfinite(env_.spot))
            throw InvalidArgument("spot must be finite and > 0");
    }

    LocalVol vol_;
    JumpParams jumps_;
    MarketEnv env_;
};

enum class PayoffKind { Call, Put, DigitalCall };

struct Payoff {
    PayoffKind kind = PayoffKind::Call;
    double strike = 1.0;
    double maturity = 1.0;

    void validate() const
    {
        if (!(strike > 0.0) || !std::isfinite(strike))
            throw InvalidArgument("strike must be finite and > 0");
        if (!(maturity > 0.0) || !std::isfinite(maturity))
            throw InvalidArgument("maturity must be finite and > 0");
    }
};

struct VolAtProxy {
    double sigma;
    double dsigma;
};

struct DriftAtProxy {
    double mu;
    double dmu;
};

/// sigma(t, x0) and d/dx sigma(t, x0).
inline VolAtProxy eval_vol_at_proxy(const ModelSpec& model, double t)
{
    if (model.variant() == ModelVariant::LogAssetAA) {
        const auto& cev = model.cev();
        const double x0 = model.proxy_point(t);
        const double skew = cev.beta(t) - 1.0;
        const double sigma = cev.nu(t) * std::exp(skew * x0);
        return {sigma, skew * sigma};
    }
    const auto& vol = model.explicit_vol();
    return {vol.sigma(t), vol.dsigma(t)};
}

/// mu(t, x0) and d/dx mu(t, x0); the log-asset drift is the martingale drift.
inline DriftAtProxy eval_drift_at_proxy(const ModelSpec& model, double t)
{
    const auto& j = model.jumps();
    if (model.variant() == ModelVariant::LogAssetAA) {
        const auto [s, ds] = eval_vol_at_proxy(model, t);
        return {j.compensator() - 0.5 * s * s, -s * ds};
    }
    return {-j.lambda * j.eta, 0.0};
}

/// sigma, sigma', mu, mu' at the proxy point on one shared grid closed at `horizon`.
struct ProxyCurves {
    PiecewiseCurve sigma;
    PiecewiseCurve dsigma;
    PiecewiseCurve mu;
    PiecewiseCurve dmu;
};

inline ProxyCurves proxy_curves(const ModelSpec& model, double horizon)
{
    const auto grid = model.vol_grid(horizon);
    std::vector<double> s, ds, m, dm;
    for (double t : grid) {
        const auto v = eval_vol_at_proxy(model, t);
        const auto d = eval_drift_at_proxy(model, t);
        s.push_back(v.sigma);
        ds.push_back(v.dsigma);
        m.push_back(d.mu);
        dm.push_back(d.dmu);
    }
    return {{grid, std::move(s)}, {grid, std::move(ds)}, {grid, std::move(m)}, {grid, std::move(dm)}};
}

}  // namespace jdexp
