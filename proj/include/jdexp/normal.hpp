// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <numbers>

namespace jdexp {

inline double normal_pdf(double x) noexcept
{
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

inline double normal_cdf(double x) noexcept
{
    return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

}  // namespace jdexp
