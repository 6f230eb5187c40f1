// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jdexp/errors.hpp"

namespace jdexp {

struct LmConfig {
    int max_iter = 50;
    double damping_init = 1e-3;
    double damping_factor = 10.0;
    double grad_tol = 1e-10;
    double step_tol = 1e-12;
};

/// Box constraints lower <= x <= upper.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] bool contains(std::span<const double> x) const noexcept
    {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lower[i] || x[i] > upper[i])
                return false;
        return true;
    }

    void project(std::span<double> x) const noexcept
    {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
};

enum class LmStatus { GradientTolerance, StepTolerance, MaxIterations, DampingExhausted, ZeroResidual };

inline const char* to_string(LmStatus s) noexcept
{
    switch (s) {
    case LmStatus::GradientTolerance: return "gradient_tolerance";
    case LmStatus::StepTolerance: return "step_tolerance";
    case LmStatus::MaxIterations: return "max_iterations";
    case LmStatus::DampingExhausted: return "damping_exhausted";
    case LmStatus::ZeroResidual: return "zero_residual";
    }
    return "unknown";
}

struct LmResult {
    std::vector<double> x;
    std::vector<double> residuals;
    double objective = 0.0;          ///< sum of squared residuals at x
    std::vector<double> trace;       ///< objective at the start and after each accepted step
    int iterations = 0;
    int evaluations = 0;
    LmStatus status = LmStatus::MaxIterations;

    [[nodiscard]] bool converged() const noexcept
    {
        return status == LmStatus::GradientTolerance || status == LmStatus::StepTolerance ||
               status == LmStatus::ZeroResidual;
    }
};

/// The residual function could not be evaluated at the starting point.
class LmStartFailure : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "lm_start_failure"; }
};

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;

/// Box-constrained Levenberg-Marquardt with Marquardt diagonal scaling and a
/// forward-difference Jacobian (step 1e-6 (1 + |x_k|), mirrored at the upper bound).
///
/// Variables sitting on a bound whose gradient pushes outward are frozen for
/// the step; trial points are projected onto the box. A residual evaluation
/// that throws at a trial point counts as a rejected step. The returned point
/// is always the best one accepted.
inline LmResult levenberg_marquardt(const ResidualFn& f, std::vector<double> x0, const Box& box,
                                    const LmConfig& cfg = {})
{
    const std::size_t n = x0.size();
    if (box.lower.size() != n || box.upper.size() != n)
        throw InvalidArgument("box dimension does not match the parameter vector");
    for (std::size_t i = 0; i < n; ++i)
        if (!(box.lower[i] <= box.upper[i]))
            throw InvalidArgument("box bounds are not ordered");
    box.project(x0);

    LmResult res;
    auto eval = [&](std::span<const double> x, std::vector<double>& out) -> bool {
        ++res.evaluations;
        try {
            out = f(x);
        } catch (const std::exception&) {
            return false;
        }
        return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
    };
    auto sumsq = [](const std::vector<double>& r) {
        double s = 0.0;
        for (double v : r)
            s += v * v;
        return s;
    };

    std::vector<double> x = x0, r;
    try {
        ++res.evaluations;
        r = f(x);
    } catch (const std::exception& e) {
        throw LmStartFailure(std::string("residual evaluation failed at the starting point: ") + e.what());
    }
    if (!std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); }))
        throw LmStartFailure("residuals are not finite at the starting point");
    const std::size_t m = r.size();
    double cost = sumsq(r);
    res.trace.push_back(cost);
    double damping = cfg.damping_init;

    Eigen::MatrixXd J(m, n);
    std::vector<double> xp(n), rp;
    res.status = LmStatus::MaxIterations;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        res.iterations = iter + 1;
        if (cost == 0.0) {
            res.status = LmStatus::ZeroResidual;
            break;
        }
        for (std::size_t k = 0; k < n; ++k) {
            xp = x;
            double h = 1e-6 * (1.0 + std::abs(x[k]));
            if (x[k] + h > box.upper[k])
                h = -h;
            xp[k] = x[k] + h;
            bool ok = eval(xp, rp);
            if (!ok) {
                h = -h;
                xp[k] = x[k] + h;
                ok = eval(xp, rp);
            }
            for (std::size_t i = 0; i < m; ++i)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ok ? (rp[i] - r[i]) / h : 0.0;
        }
        const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
        const Eigen::VectorXd g = J.transpose() * rv;

        std::vector<Eigen::Index> free;
        double gmax = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const bool pinned = (x[k] <= box.lower[k] && g(kk) > 0.0) || (x[k] >= box.upper[k] && g(kk) < 0.0);
            if (!pinned) {
                free.push_back(kk);
                gmax = std::max(gmax, std::abs(g(kk)));
            }
        }
        if (gmax <= cfg.grad_tol) {
            res.status = LmStatus::GradientTolerance;
            break;
        }

        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd A(nf, nf);
        Eigen::VectorXd gf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            gf(a) = g(free[a]);
            for (Eigen::Index b = 0; b < nf; ++b)
                A(a, b) = J.col(free[a]).dot(J.col(free[b]));
        }
        const double diag_floor = 1e-12 * std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());

        bool accepted = false;
        bool step_small = false;
        while (!accepted) {
            Eigen::MatrixXd Ad = A;
            for (Eigen::Index a = 0; a < nf; ++a)
                Ad(a, a) += damping * std::max(A(a, a), diag_floor);
            const Eigen::VectorXd delta = Ad.ldlt().solve(-gf);
            xp = x;
            for (Eigen::Index a = 0; a < nf; ++a)
                xp[static_cast<std::size_t>(free[a])] += delta(a);
            box.project(xp);

            double step_norm = 0.0, x_norm = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                step_norm += (xp[k] - x[k]) * (xp[k] - x[k]);
                x_norm += x[k] * x[k];
            }
            if (std::sqrt(step_norm) <= cfg.step_tol * (std::sqrt(x_norm) + cfg.step_tol)) {
                step_small = true;
                break;
            }
            if (eval(xp, rp)) {
                const double trial = sumsq(rp);
                if (trial < cost) {
                    x = xp;
                    r = rp;
                    cost = trial;
                    res.trace.push_back(cost);
                    damping = std::max(damping / cfg.damping_factor, 1e-15);
                    accepted = true;
                    continue;
                }
            }
            damping *= cfg.damping_factor;
            if (damping > 1e20)
                break;
        }
        if (step_small) {
            res.status = LmStatus::StepTolerance;
            break;
        }
        if (!accepted) {
            res.status = LmStatus::DampingExhausted;
            break;
        }
    }
    res.x = std::move(x);
    res.residuals = std::move(r);
    res.objective = cost;
    return res;
}

}  // namespace jdexp
