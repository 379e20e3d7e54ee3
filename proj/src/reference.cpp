#include "nfbo/reference.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace nfbo::reference {

Matrix gram_matrix(const KernelSpec& spec, const PointSet& X) {
    spec.validate();
    const int n = static_cast<int>(X.cols());
    Matrix K(n, n);
    for (int j = 0; j < n; ++j) {
        K(j, j) = 1.0;
        for (int i = 0; i < j; ++i) {
            const double k = eval_kernel_radial(spec, (X.col(i) - X.col(j)).norm());
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

Matrix cross_gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    spec.validate();
    if (X.rows() != Y.rows()) throw DimensionMismatch("cross_gram: point dimensions differ");
    const int n = static_cast<int>(X.cols());
    const int m = static_cast<int>(Y.cols());
    Matrix K(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            K(i, j) = eval_kernel_radial(spec, (X.col(i) - Y.col(j)).norm());
    return K;
}

double fill_distance(const PointSet& reference, const PointSet& design) {
    if (reference.cols() == 0 || design.cols() == 0)
        throw ConfigError("fill_distance: reference and design must be nonempty");
    if (reference.rows() != design.rows())
        throw DimensionMismatch("fill_distance: dimension mismatch");
    const int n = static_cast<int>(reference.cols());
    Vector nearest(n);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < design.cols(); ++j)
            best = std::min(best, (reference.col(i) - design.col(j)).norm());
        nearest[i] = best;
    }
    return nearest.maxCoeff();
}

Vector energy_values(const EnergyFunction& V, const PointSet& nodes) {
    const Eigen::Index n = nodes.cols();
    Vector values(n);
    long failures = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            values[i] = energy(V, nodes.col(i));
        } catch (const Error& e) {
            std::fprintf(stderr, "energy evaluation failed at node %lld: %s\n",
                         static_cast<long long>(i), e.what());
            values[i] = -std::numeric_limits<double>::infinity();
            ++failures;
        }
    }
    if (failures * 100 > n) throw Error("more than 1% of grid energy evaluations failed");
    return values;
}

}  // namespace nfbo::reference
