#include "nfbo/kernels.hpp"

#include "nfbo/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nfbo {

void KernelSpec::validate() const {
    if (!(lengthscale > 0.0)) throw ConfigError("KernelSpec: lengthscale must be > 0");
    if (family == KernelFamily::Matern && !(nu > 0.0))
        throw ConfigError("KernelSpec: Matern smoothness nu must be > 0");
}

double eval_kernel_radial(const KernelSpec& spec, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error("eval_kernel_radial: invalid distance");
    if (spec.family == KernelFamily::SquaredExponential) {
        double z = r / spec.lengthscale;
        return std::exp(-0.5 * z * z);
    }
    if (r == 0.0) return 1.0;
    const double s = std::sqrt(2.0 * spec.nu) * r / spec.lengthscale;
    if (spec.nu == 0.5) return std::exp(-s);
    if (spec.nu == 1.5) return (1.0 + s) * std::exp(-s);
    if (spec.nu == 2.5) return (1.0 + s + s * s / 3.0) * std::exp(-s);
    if (s < 1e-12) return 1.0;
    double k = std::pow(2.0, 1.0 - spec.nu) / std::tgamma(spec.nu) * std::pow(s, spec.nu) *
               std::cyl_bessel_k(spec.nu, s);
    // Bessel round-off can push the value a hair past the theoretical range.
    return std::clamp(k, 0.0, 1.0);
}

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y) {
    spec.validate();
    if (x.size() != y.size()) throw DimensionMismatch("eval_kernel: point dimensions differ");
    require_finite(x, "eval_kernel");
    require_finite(y, "eval_kernel");
    if (x == y) return 1.0;
    return eval_kernel_radial(spec, (x - y).norm());
}

namespace {

/// Symmetric pairwise distance matrix of the columns of X.
Matrix pairwise_distances(const PointSet& X) {
    const int n = static_cast<int>(X.cols());
    Matrix R(n, n);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (int j = 0; j < n; ++j) {
        R(j, j) = 0.0;
        for (int i = 0; i < j; ++i) {
            double r = (X.col(i) - X.col(j)).norm();
            R(i, j) = r;
            R(j, i) = r;
        }
    }
    return R;
}

Matrix gram_from_distances(const KernelSpec& spec, const Matrix& R) {
    const int n = static_cast<int>(R.cols());
    Matrix K(n, n);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (int j = 0; j < n; ++j) {
        K(j, j) = 1.0;
        for (int i = 0; i < j; ++i) {
            double k = eval_kernel_radial(spec, R(i, j));
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

}  // namespace

Matrix gram_matrix(const KernelSpec& spec, const PointSet& X) {
    spec.validate();
    if (!X.allFinite()) throw Error("gram_matrix: non-finite coordinates");
    return gram_from_distances(spec, pairwise_distances(X));
}

Vector kernel_vector(const KernelSpec& spec, const PointSet& X, const Vector& x) {
    spec.validate();
    if (X.rows() != x.size()) throw DimensionMismatch("kernel_vector: point dimensions differ");
    require_finite(x, "kernel_vector");
    const int n = static_cast<int>(X.cols());
    Vector k(n);
    for (int i = 0; i < n; ++i) k[i] = eval_kernel_radial(spec, (X.col(i) - x).norm());
    return k;
}

Matrix cross_gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    spec.validate();
    if (X.rows() != Y.rows()) throw DimensionMismatch("cross_gram: point dimensions differ");
    const int n = static_cast<int>(X.cols());
    const int m = static_cast<int>(Y.cols());
    Matrix K(n, m);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            K(i, j) = eval_kernel_radial(spec, (X.col(i) - Y.col(j)).norm());
    return K;
}

CholResult cholesky_with_ladder(const Matrix& A, double jitter) {
    if (jitter < 0.0) throw ConfigError("cholesky_with_ladder: jitter must be >= 0");
    const double mean_diag = A.diagonal().mean();
    std::vector<double> candidates{jitter};
    for (double level : {1e-12, 1e-10, 1e-8, 1e-6}) {
        double c = level * mean_diag;
        if (c > jitter) candidates.push_back(c);
    }
    for (double c : candidates) {
        Matrix B = A;
        B.diagonal().array() += c;
        Eigen::LLT<Matrix> llt(B);
        if (llt.info() == Eigen::Success) return {Matrix(llt.matrixL()), c};
    }
    throw FactorizationFailure("cholesky_with_ladder: jitter ladder exhausted");
}

double log_marginal_likelihood(const KernelSpec& spec, const PointSet& X, const Vector& F,
                               double jitter) {
    spec.validate();
    if (X.cols() != F.size() || F.size() < 1)
        throw DimensionMismatch("log_marginal_likelihood: |X| must equal |F| >= 1");
    const auto chol = cholesky_with_ladder(gram_matrix(spec, X), jitter);
    Vector y = chol.L.triangularView<Eigen::Lower>().solve(F);
    const double n = static_cast<double>(F.size());
    return -0.5 * y.squaredNorm() - chol.L.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<double> default_lengthscale_grid(double diameter, int size) {
    if (!(diameter > 0.0)) throw ConfigError("default_lengthscale_grid: diameter must be > 0");
    if (size < 1) throw ConfigError("default_lengthscale_grid: size must be >= 1");
    const double lo = std::log(1e-2 * diameter), hi = std::log(1e2 * diameter);
    std::vector<double> grid(size);
    if (size == 1) {
        grid[0] = std::exp(0.5 * (lo + hi));
        return grid;
    }
    for (int k = 0; k < size; ++k)
        grid[k] = std::exp(lo + (hi - lo) * k / (size - 1));
    return grid;
}

KernelSpec fit_hyperparameters(const KernelSpec& spec, const PointSet& X, const Vector& F,
                               const std::vector<double>& grid, double jitter) {
    spec.validate();
    if (X.cols() < 2) throw ConfigError("fit_hyperparameters: need at least 2 points");
    if (X.cols() != F.size()) throw DimensionMismatch("fit_hyperparameters: |X| != |F|");
    if (grid.empty()) throw ConfigError("fit_hyperparameters: empty lengthscale grid");

    std::vector<double> candidates(grid);
    std::sort(candidates.begin(), candidates.end());
    const Matrix R = pairwise_distances(X);
    const double n = static_cast<double>(F.size());

    KernelSpec best = spec;
    double best_lml = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double ell : candidates) {
        KernelSpec cand = spec;
        cand.lengthscale = ell;
        cand.validate();
        double lml;
        try {
            const auto chol = cholesky_with_ladder(gram_from_distances(cand, R), jitter);
            Vector y = chol.L.triangularView<Eigen::Lower>().solve(F);
            lml = -0.5 * y.squaredNorm() - chol.L.diagonal().array().log().sum() -
                  0.5 * n * std::log(2.0 * std::numbers::pi);
        } catch (const FactorizationFailure&) {
            continue;
        }
        if (!any || lml > best_lml) {  // strict: ties keep the smaller lengthscale
            best = cand;
            best_lml = lml;
            any = true;
        }
    }
    if (!any) throw FactorizationFailure("fit_hyperparameters: every candidate failed");
    return best;
}

}  // namespace nfbo
