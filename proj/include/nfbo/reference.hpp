#pragma once

#include "nfbo/inference.hpp"
#include "nfbo/kernels.hpp"
#include "nfbo/types.hpp"

// Serial reference implementations of every OpenMP-parallel kernel in the
// library. They share the scalar helpers with the parallel versions, so the
// results must match bit for bit; the tests assert exactly that, and
// tools/parallel_bench compares their speed.

namespace nfbo::reference {

Matrix gram_matrix(const KernelSpec& spec, const PointSet& X);

Matrix cross_gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

double fill_distance(const PointSet& reference, const PointSet& design);

Vector energy_values(const EnergyFunction& V, const PointSet& nodes);

}  // namespace nfbo::reference
