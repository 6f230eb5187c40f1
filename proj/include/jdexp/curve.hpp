// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jdexp/errors.hpp"

namespace jdexp {

/// Right-continuous step function of time.
///
/// Breakpoints T_1 < ... < T_n are stored explicitly, T_0 = 0 is implied.
/// values[i] applies on the left-open interval (T_{i-1}, T_i]; the last
/// value is extended flat beyond T_n and t <= 0 maps to the first value.
class PiecewiseCurve {
public:
    PiecewiseCurve() : times_{1.0}, values_{0.0} {}

    PiecewiseCurve(std::vector<double> times, std::vector<double> values)
        : times_(std::move(times)), values_(std::move(values))
    {
        if (times_.empty())
            throw InvalidArgument("curve needs at least one breakpoint");
        if (times_.size() != values_.size())
            throw InvalidArgument("curve times and values differ in length");
        double prev = 0.0;
        for (double t : times_) {
            if (!std::isfinite(t) || !(t > prev))
                throw InvalidArgument("curve breakpoints must be finite and strictly increasing from 0");
            prev = t;
        }
        for (double v : values_)
            if (!std::isfinite(v))
                throw InvalidArgument("curve values must be finite");
    }

    static PiecewiseCurve constant(double value, double until = 1.0)
    {
        return PiecewiseCurve({until}, {value});
    }

    [[nodiscard]] double operator()(double t) const noexcept { return values_[index_of(t)]; }

    /// Index of the interval (T_{i-1}, T_i] holding t.
    [[nodiscard]] std::size_t index_of(double t) const noexcept
    {
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        if (it == times_.end())
            return times_.size() - 1;
        return static_cast<std::size_t>(it - times_.begin());
    }

    /// Exact integral over [a, b], a <= b.
    [[nodiscard]] double integral(double a, double b) const noexcept
    {
        if (b <= a)
            return 0.0;
        double sum = 0.0;
        double left = 0.0;
        for (std::size_t i = 0; i < times_.size(); ++i) {
            const double right = (i + 1 == times_.size()) ? std::max(b, times_[i]) : times_[i];
            const double lo = std::max(a, left);
            const double hi = std::min(b, right);
            if (hi > lo)
                sum += values_[i] * (hi - lo);
            if (right >= b)
                break;
            left = right;
        }
        return sum;
    }

    [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }

    /// Same function sampled on a refinement grid (grid must refine the
    /// breakpoints up to its last point).
    [[nodiscard]] PiecewiseCurve resampled(std::span<const double> grid) const
    {
        std::vector<double> v;
        v.reserve(grid.size());
        for (double t : grid)
            v.push_back((*this)(t));
        return {std::vector<double>(grid.begin(), grid.end()), std::move(v)};
    }

    template <class F>
    [[nodiscard]] PiecewiseCurve transformed(F&& f) const
    {
        std::vector<double> v;
        v.reserve(values_.size());
        for (double x : values_)
            v.push_back(f(x));
        return {times_, std::move(v)};
    }

    friend bool operator==(const PiecewiseCurve&, const PiecewiseCurve&) = default;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

namespace detail {

inline bool nearly_same_time(double a, double b) noexcept
{
    return std::abs(a - b) <= 1e-13 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/// Union of the curves' breakpoints strictly below `horizon`, closed by `horizon`.
inline std::vector<double> merged_grid(std::span<const PiecewiseCurve* const> curves, double horizon)
{
    std::vector<double> grid;
    for (const auto* c : curves)
        for (double t : c->times())
            if (t < horizon)
                grid.push_back(t);
    grid.push_back(horizon);
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) {
        if (!out.empty() && detail::nearly_same_time(out.back(), t)) {
            out.back() = t;  // keep the later, so the horizon survives exactly
            continue;
        }
        out.push_back(t);
    }
    return out;
}

inline std::vector<double> merged_grid(std::initializer_list<const PiecewiseCurve*> curves, double horizon)
{
    return merged_grid(std::span<const PiecewiseCurve* const>(curves.begin(), curves.size()), horizon);
}

inline bool same_grid(const PiecewiseCurve& a, const PiecewiseCurve& b) noexcept
{
    return std::ranges::equal(a.times(), b.times());
}

}  // namespace jdexp
