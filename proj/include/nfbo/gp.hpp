#pragma once

#include "nfbo/kernels.hpp"
#include "nfbo/types.hpp"

namespace nfbo {

/// Interpolation data: column i of X carries observation F[i].
struct TrainingSet {
    PointSet X;
    Vector F;

    int size() const { return static_cast<int>(F.size()); }
};

/// Exact (noise-free) Gaussian process interpolant with optional ridge
/// regularization lambda; lambda = 0 is the interpolation case.
///
/// Immutable after construction: update() returns a new model, so a fitted
/// model can be shared across threads for concurrent prediction.
class GPModel {
public:
    /// Factorizes K + (lambda + jitter) I. A floor jitter of 1e-12 x mean
    /// diagonal is always applied; the ladder escalates it on failure and
    /// the level actually used is recorded in jitter_used().
    /// duplicate_tol is the pairwise-distance threshold below which two
    /// points count as the same point (callers scale it to their domain).
    static GPModel fit(const KernelSpec& kernel, TrainingSet data, double lambda = 0.0,
                       double duplicate_tol = 0.0);

    /// Extends the model with one observation via a rank-1 Cholesky border;
    /// predictions agree with a fresh fit on the extended data.
    GPModel update(const Vector& x_new, double f_new) const;

    double posterior_mean(const Vector& x) const;
    double posterior_var(const Vector& x) const;

    /// Batch prediction over the columns of Xs (blocked triangular solves;
    /// markedly faster than per-point calls on large pools).
    Vector posterior_means(const PointSet& Xs) const;
    void posterior_mean_var(const PointSet& Xs, Vector& mean, Vector& var) const;

    const KernelSpec& kernel() const { return kernel_; }
    const TrainingSet& data() const { return data_; }
    double lambda() const { return lambda_; }
    double jitter_used() const { return jitter_; }
    double duplicate_tol() const { return duplicate_tol_; }
    int size() const { return data_.size(); }

private:
    GPModel() = default;

    KernelSpec kernel_;
    TrainingSet data_;
    Matrix L_;       // lower Cholesky factor of K + (lambda + jitter) I
    Vector alpha_;   // (K + (lambda + jitter) I)^{-1} F
    double lambda_ = 0.0;
    double jitter_ = 0.0;
    double duplicate_tol_ = 0.0;
};

}  // namespace nfbo
