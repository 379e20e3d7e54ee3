#include "nfbo/sampling.hpp"

#include <numeric>
#include <vector>

namespace nfbo {

PointSet uniform_box(const SearchDomain& domain, int n, RandomStream& rng) {
    if (n < 0) throw ConfigError("uniform_box: n must be >= 0");
    const int d = domain.dim();
    PointSet X(d, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(j, i) = rng.uniform(domain.lo[j], domain.hi[j]);
    return X;
}

PointSet latin_hypercube(const SearchDomain& domain, int n, RandomStream& rng) {
    if (n < 0) throw ConfigError("latin_hypercube: n must be >= 0");
    const int d = domain.dim();
    PointSet X(d, n);
    std::vector<int> perm(n);
    for (int j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.index(static_cast<std::size_t>(i) + 1)]);
        const double cell = domain.side(j) / n;
        for (int i = 0; i < n; ++i)
            X(j, i) = domain.lo[j] + (perm[i] + rng.uniform01()) * cell;
    }
    return X;
}

}  // namespace nfbo
