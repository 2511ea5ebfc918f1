#pragma once

// Everything at once: basis and operators, phase-space transforms, derivations,
// maximal functions and weights, R-bounds, Heisenberg fibers, experiments.

#include "weylab/errors.hpp"
#include "weylab/parallel.hpp"
#include "weylab/hermite_core.hpp"
#include "weylab/grid.hpp"
#include "weylab/weyl_transform.hpp"
#include "weylab/derivation_calculus.hpp"
#include "weylab/maximal_weights.hpp"
#include "weylab/rbound_lab.hpp"
#include "weylab/heisenberg_fiber.hpp"
#include "weylab/experiments.hpp"
