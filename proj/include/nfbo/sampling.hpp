#pragma once

#include "nfbo/rng.hpp"
#include "nfbo/types.hpp"

namespace nfbo {

/// n independent uniform draws from the box; column i is point i.
/// Consumes d uniforms per point, point-major.
PointSet uniform_box(const SearchDomain& domain, int n, RandomStream& rng);

/// Latin hypercube design: per dimension, each of the n equal strata
/// receives exactly one point, placed uniformly inside its stratum.
/// Consumes, dimension-major: one Fisher-Yates shuffle then n jitters.
PointSet latin_hypercube(const SearchDomain& domain, int n, RandomStream& rng);

}  // namespace nfbo
