// SPDX-License-Identifier: MIT
#pragma once

// JSON model files:
//   {"variant": "log_aa" | "normal", "spot": 100,
//    "rate": curve, "dividend": curve,            (optional, default 0)
//    "nu": curve, "beta": curve,                  (log_aa)
//    "sigma": curve, "dsigma": curve,             (normal)
//    "jumps": {"lambda": 0.3, "eta": -0.08, "gamma": 0.35}}
// with curve = {"times": [t1, ..., tn], "values": [v1, ..., vn]} and T0 = 0 implied.

#include <string>

#include "json.hpp"

#include "jdexp/calibration.hpp"
#include "jdexp/curve.hpp"
#include "jdexp/errors.hpp"
#include "jdexp/model.hpp"

namespace jdexp::io {

using nlohmann::json;

namespace detail {

inline const json& field(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object())
        throw SchemaError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(path + "." + key, "missing field");
    return *it;
}

inline double number(const json& v, const std::string& path)
{
    if (!v.is_number())
        throw SchemaError(path, "expected a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const std::string& key, double fallback, const std::string& path)
{
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, path + "." + key);
}

}  // namespace detail

inline PiecewiseCurve curve_from_json(const json& j, const std::string& path)
{
    const auto& times = detail::field(j, "times", path);
    const auto& values = detail::field(j, "values", path);
    if (!times.is_array() || !values.is_array())
        throw SchemaError(path, "times and values must be arrays");
    std::vector<double> t, v;
    for (std::size_t i = 0; i < times.size(); ++i)
        t.push_back(detail::number(times[i], path + ".times[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < values.size(); ++i)
        v.push_back(detail::number(values[i], path + ".values[" + std::to_string(i) + "]"));
    try {
        return {std::move(t), std::move(v)};
    } catch (const InvalidArgument& e) {
        throw SchemaError(path, e.what());
    }
}

inline json curve_to_json(const PiecewiseCurve& c)
{
    return {{"times", std::vector<double>(c.times().begin(), c.times().end())},
            {"values", std::vector<double>(c.values().begin(), c.values().end())}};
}

inline JumpParams jumps_from_json(const json& j, const std::string& path)
{
    JumpParams p{detail::number(detail::field(j, "lambda", path), path + ".lambda"),
                 detail::number(detail::field(j, "eta", path), path + ".eta"),
                 detail::number(detail::field(j, "gamma", path), path + ".gamma")};
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw SchemaError(path, e.what());
    }
    return p;
}

inline json jumps_to_json(const JumpParams& j)
{
    return {{"lambda", j.lambda}, {"eta", j.eta}, {"gamma", j.gamma}};
}

inline ModelSpec model_from_json(const json& j)
{
    const std::string root = "$";
    const auto& variant = detail::field(j, "variant", root);
    if (!variant.is_string())
        throw SchemaError("$.variant", "expected \"log_aa\" or \"normal\"");
    MarketEnv env;
    env.spot = detail::number(detail::field(j, "spot", root), "$.spot");
    if (!(env.spot > 0.0))
        throw SchemaError("$.spot", "must be > 0");
    if (j.contains("rate"))
        env.rate = curve_from_json(j["rate"], "$.rate");
    if (j.contains("dividend"))
        env.dividend = curve_from_json(j["dividend"], "$.dividend");
    const JumpParams jumps = j.contains("jumps") ? jumps_from_json(j["jumps"], "$.jumps") : JumpParams{};

    const auto v = variant.get<std::string>();
    try {
        if (v == "log_aa") {
            CevLocalVol vol{curve_from_json(detail::field(j, "nu", root), "$.nu"),
                            curve_from_json(detail::field(j, "beta", root), "$.beta")};
            return ModelSpec::log_aa(std::move(vol), jumps, std::move(env));
        }
        if (v == "normal") {
            ProxyVolCurves vol{curve_from_json(detail::field(j, "sigma", root), "$.sigma"),
                               curve_from_json(detail::field(j, "dsigma", root), "$.dsigma")};
            return ModelSpec::normal(std::move(vol), jumps, std::move(env));
        }
    } catch (const InvalidArgument& e) {
        throw SchemaError("$", e.what());
    }
    throw SchemaError("$.variant", "expected \"log_aa\" or \"normal\"");
}

inline json model_to_json(const ModelSpec& m)
{
    json j;
    j["variant"] = m.variant() == ModelVariant::LogAssetAA ? "log_aa" : "normal";
    j["spot"] = m.env().spot;
    j["rate"] = curve_to_json(m.env().rate);
    j["dividend"] = curve_to_json(m.env().dividend);
    if (m.variant() == ModelVariant::LogAssetAA) {
        j["nu"] = curve_to_json(m.cev().nu);
        j["beta"] = curve_to_json(m.cev().beta);
    } else {
        j["sigma"] = curve_to_json(m.explicit_vol().sigma);
        j["dsigma"] = curve_to_json(m.explicit_vol().dsigma);
    }
    j["jumps"] = jumps_to_json(m.jumps());
    return j;
}

inline CalibConfig calib_config_from_json(const json& j)
{
    const std::string root = "$";
    if (!j.is_object())
        throw SchemaError(root, "expected an object");
    CalibConfig c;
    if (j.contains("jump_init"))
        c.jump_init = jumps_from_json(j["jump_init"], "$.jump_init");
    if (j.contains("calibrate_jumps")) {
        if (!j["calibrate_jumps"].is_boolean())
            throw SchemaError("$.calibrate_jumps", "expected a boolean");
        c.calibrate_jumps = j["calibrate_jumps"].get<bool>();
    }
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        const std::string p = "$.bounds";
        auto& cb = c.bounds;
        cb.nu_lower = detail::number_or(b, "nu_lower", cb.nu_lower, p);
        cb.nu_upper = detail::number_or(b, "nu_upper", cb.nu_upper, p);
        cb.beta_lower = detail::number_or(b, "beta_lower", cb.beta_lower, p);
        cb.beta_upper = detail::number_or(b, "beta_upper", cb.beta_upper, p);
        cb.lambda_lower = detail::number_or(b, "lambda_lower", cb.lambda_lower, p);
        cb.lambda_upper = detail::number_or(b, "lambda_upper", cb.lambda_upper, p);
        cb.eta_lower = detail::number_or(b, "eta_lower", cb.eta_lower, p);
        cb.eta_upper = detail::number_or(b, "eta_upper", cb.eta_upper, p);
        cb.gamma_lower = detail::number_or(b, "gamma_lower", cb.gamma_lower, p);
        cb.gamma_upper = detail::number_or(b, "gamma_upper", cb.gamma_upper, p);
        try {
            cb.validate();
        } catch (const InvalidArgument& e) {
            throw SchemaError(p, e.what());
        }
    }
    if (j.contains("lm")) {
        const auto& l = j["lm"];
        const std::string p = "$.lm";
        c.lm.max_iter = static_cast<int>(detail::number_or(l, "max_iter", c.lm.max_iter, p));
        c.lm.damping_init = detail::number_or(l, "damping_init", c.lm.damping_init, p);
        c.lm.damping_factor = detail::number_or(l, "damping_factor", c.lm.damping_factor, p);
        c.lm.grad_tol = detail::number_or(l, "grad_tol", c.lm.grad_tol, p);
        c.lm.step_tol = detail::number_or(l, "step_tol", c.lm.step_tol, p);
    }
    if (j.contains("outer")) {
        const auto& o = j["outer"];
        c.outer.max_iter = static_cast<int>(detail::number_or(o, "max_iter", c.outer.max_iter, "$.outer"));
        c.outer.tol = detail::number_or(o, "tol", c.outer.tol, "$.outer");
    }
    c.restarts = static_cast<int>(detail::number_or(j, "restarts", c.restarts, root));
    return c;
}

/// Result document: a complete model file plus a "calibration" section.
inline json calibration_to_json(const CalibrationResult& r)
{
    json j = model_to_json(r.model());
    json cal;
    cal["maturities"] = r.maturities;
    cal["strikes"] = r.strikes;
    cal["market_vols"] = r.market_vols;
    cal["model_vols"] = r.model_vols;
    cal["residuals_bp"] = r.residuals_bp;
    cal["objective_trace"] = r.objective_trace;
    cal["degraded_buckets"] = r.degraded_buckets;
    cal["outer_converged"] = r.outer_converged;
    cal["max_abs_residual_bp"] = r.max_abs_residual_bp();
    j["calibration"] = std::move(cal);
    return j;
}

}  // namespace jdexp::io
