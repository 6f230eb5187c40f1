// SPDX-License-Identifier: MIT
#pragma once

#include "jdexp/analytic.hpp"
#include "jdexp/calibration.hpp"
#include "jdexp/curve.hpp"
#include "jdexp/errors.hpp"
#include "jdexp/expansion.hpp"
#include "jdexp/implied_vol.hpp"
#include "jdexp/levenberg_marquardt.hpp"
#include "jdexp/model.hpp"
#include "jdexp/montecarlo.hpp"
#include "jdexp/normal.hpp"
#include "jdexp/quadrature.hpp"
