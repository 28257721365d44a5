#pragma once

// Umbrella header: the shrinking projection solver for split equilibrium
// and common fixed point problems, with its analytic reference module.

#include "sepfp/convex.hpp"
#include "sepfp/equilibrium.hpp"
#include "sepfp/errors.hpp"
#include "sepfp/mapping.hpp"
#include "sepfp/nnls.hpp"
#include "sepfp/oracle.hpp"
#include "sepfp/rng.hpp"
#include "sepfp/sampling.hpp"
#include "sepfp/schedule.hpp"
#include "sepfp/solver.hpp"
#include "sepfp/space.hpp"
