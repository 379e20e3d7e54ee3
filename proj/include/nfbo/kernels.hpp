#pragma once

#include "nfbo/types.hpp"

#include <vector>

namespace nfbo {

enum class KernelFamily { Matern, SquaredExponential };

/// Unit-amplitude stationary kernel: k(x,x) = 1 everywhere.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern;
    double lengthscale = 1.0;
    double nu = 2.5;  // Matern smoothness; ignored by SquaredExponential

    void validate() const;
};

/// Kernel value as a function of the distance r = ||x - y|| >= 0.
/// Matern: (2^{1-nu}/Gamma(nu)) s^nu K_nu(s) with s = sqrt(2 nu) r / l;
/// half-integer nu in {1/2, 3/2, 5/2} uses the closed forms, other nu the
/// Bessel evaluation. Squared exponential: exp(-r^2 / (2 l^2)).
double eval_kernel_radial(const KernelSpec& spec, double r);

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Entry (i,j) = k(x_i, x_j) for columns x_i of X; symmetric, unit diagonal.
Matrix gram_matrix(const KernelSpec& spec, const PointSet& X);

/// k_t(x): kernel between each column of X and the point x.
Vector kernel_vector(const KernelSpec& spec, const PointSet& X, const Vector& x);

/// Entry (i,j) = k(X.col(i), Y.col(j)).
Matrix cross_gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

struct CholResult {
    Matrix L;           // lower-triangular factor of A + jitter_used * I
    double jitter_used;
};

/// Cholesky of A + jitter*I. If the factorization fails, jitter escalates
/// through {1e-12, 1e-10, 1e-8, 1e-6} x mean(diag A) before giving up.
CholResult cholesky_with_ladder(const Matrix& A, double jitter);

/// Zero-mean GP log evidence
///   -1/2 F'(K + jitter I)^{-1} F - 1/2 log|K + jitter I| - (t/2) log(2 pi).
double log_marginal_likelihood(const KernelSpec& spec, const PointSet& X, const Vector& F,
                               double jitter = 0.0);

/// Log-spaced lengthscale candidates spanning [1e-2, 1e2] x diameter.
std::vector<double> default_lengthscale_grid(double diameter, int size = 25);

/// Maximum-marginal-likelihood lengthscale over the candidate grid; family
/// and nu stay fixed. Ties prefer the smallest lengthscale; candidates whose
/// factorization fails are skipped.
KernelSpec fit_hyperparameters(const KernelSpec& spec, const PointSet& X, const Vector& F,
                               const std::vector<double>& grid, double jitter = 0.0);

}  // namespace nfbo
