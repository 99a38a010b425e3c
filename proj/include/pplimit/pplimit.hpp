// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "pplimit/bounds.hpp"
#include "pplimit/convex_body.hpp"
#include "pplimit/core.hpp"
#include "pplimit/experiment.hpp"
#include "pplimit/geometry.hpp"
#include "pplimit/limits.hpp"
#include "pplimit/models.hpp"
#include "pplimit/numerics.hpp"
#include "pplimit/report.hpp"
#include "pplimit/rng.hpp"
#include "pplimit/sampling.hpp"
#include "pplimit/ustat.hpp"
