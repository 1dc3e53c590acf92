#pragma once

#include "csaddle/harness/config.hpp"

namespace csaddle::harness {

/// Realize an initial-condition descriptor on a grid. H^-1 profiles come out
/// with their stated mass; perturbations are seeded, zero-mean noise.
Field build_initial(const InitialCondition& init, const GridPtr& grid, MetricKind metric);

}  // namespace csaddle::harness
