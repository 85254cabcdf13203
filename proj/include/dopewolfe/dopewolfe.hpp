#pragma once

#include "dopewolfe/combinatorics.hpp"
#include "dopewolfe/design_objective.hpp"
#include "dopewolfe/errors.hpp"
#include "dopewolfe/features.hpp"
#include "dopewolfe/harness.hpp"
#include "dopewolfe/metrics.hpp"
#include "dopewolfe/plackett_luce.hpp"
#include "dopewolfe/random.hpp"
#include "dopewolfe/solver.hpp"
