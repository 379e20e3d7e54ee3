#pragma once

namespace nfbo::parallel {

/// Worker count: min(omp_get_max_threads(), NOISEFREE_BO_THREADS if set).
int max_threads();

/// Override the worker count for this process (n <= 0 restores the default).
void set_threads(int n);

}  // namespace nfbo::parallel
