#include "nfbo/gp.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace nfbo {

namespace {

constexpr double kFloorJitterLevel = 1e-12;
constexpr double kNegativeVarianceSlack = 1e-8;

void check_no_duplicates(const PointSet& X, double tol) {
    for (int j = 1; j < X.cols(); ++j)
        for (int i = 0; i < j; ++i)
            if ((X.col(i) - X.col(j)).norm() <= tol)
                throw DuplicatePoints("GPModel: training points " + std::to_string(i) + " and " +
                                      std::to_string(j) + " coincide");
}

double clamp_variance(double var, double prior) {
    if (var < -kNegativeVarianceSlack)
        throw Error("GPModel: posterior variance " + std::to_string(var) +
                    " is negative beyond round-off");
    return std::min(std::max(var, 0.0), prior);
}

}  // namespace

GPModel GPModel::fit(const KernelSpec& kernel, TrainingSet data, double lambda,
                     double duplicate_tol) {
    kernel.validate();
    if (lambda < 0.0) throw ConfigError("GPModel::fit: lambda must be >= 0");
    if (data.X.cols() != data.F.size() || data.size() == 0)
        throw DimensionMismatch("GPModel::fit: need |X| = |F| >= 1");
    if (!data.X.allFinite() || !data.F.allFinite())
        throw Error("GPModel::fit: non-finite training data");
    check_no_duplicates(data.X, duplicate_tol);

    Matrix A = gram_matrix(kernel, data.X);
    A.diagonal().array() += lambda;
    const double floor = kFloorJitterLevel * A.diagonal().mean();
    auto chol = cholesky_with_ladder(A, floor);

    GPModel m;
    m.kernel_ = kernel;
    m.data_ = std::move(data);
    m.L_ = std::move(chol.L);
    m.alpha_ = m.L_.triangularView<Eigen::Lower>().solve(m.data_.F);
    m.L_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
    m.lambda_ = lambda;
    m.jitter_ = chol.jitter_used;
    m.duplicate_tol_ = duplicate_tol;
    return m;
}

GPModel GPModel::update(const Vector& x_new, double f_new) const {
    if (x_new.size() != data_.X.rows())
        throw DimensionMismatch("GPModel::update: point dimension mismatch");
    require_finite(x_new, "GPModel::update");
    if (!std::isfinite(f_new)) throw Error("GPModel::update: non-finite observation");
    for (int i = 0; i < data_.X.cols(); ++i)
        if ((data_.X.col(i) - x_new).norm() <= duplicate_tol_)
            throw DuplicatePoints("GPModel::update: new point duplicates training point " +
                                  std::to_string(i));

    const int n = size();
    Vector k = kernel_vector(kernel_, data_.X, x_new);
    Vector w = L_.triangularView<Eigen::Lower>().solve(k);
    const double knn = 1.0 + lambda_ + jitter_;
    const double d2 = knn - w.squaredNorm();
    GPModel m;
    if (d2 > 1e-14 * knn) {
        // Border the existing factor with one new row.
        m.L_ = Matrix::Zero(n + 1, n + 1);
        m.L_.topLeftCorner(n, n) = L_;
        m.L_.row(n).head(n) = w.transpose();
        m.L_(n, n) = std::sqrt(d2);
    } else {
        // Degenerate border: refit from scratch so the ladder can escalate.
        TrainingSet ext{PointSet(data_.X.rows(), n + 1), Vector(n + 1)};
        ext.X.leftCols(n) = data_.X;
        ext.X.col(n) = x_new;
        ext.F.head(n) = data_.F;
        ext.F[n] = f_new;
        return fit(kernel_, std::move(ext), lambda_, duplicate_tol_);
    }
    m.kernel_ = kernel_;
    m.data_.X.resize(data_.X.rows(), n + 1);
    m.data_.X.leftCols(n) = data_.X;
    m.data_.X.col(n) = x_new;
    m.data_.F.resize(n + 1);
    m.data_.F.head(n) = data_.F;
    m.data_.F[n] = f_new;
    m.alpha_ = m.L_.triangularView<Eigen::Lower>().solve(m.data_.F);
    m.L_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
    m.lambda_ = lambda_;
    m.jitter_ = jitter_;
    m.duplicate_tol_ = duplicate_tol_;
    return m;
}

double GPModel::posterior_mean(const Vector& x) const {
    return kernel_vector(kernel_, data_.X, x).dot(alpha_);
}

double GPModel::posterior_var(const Vector& x) const {
    Vector k = kernel_vector(kernel_, data_.X, x);
    Vector v = L_.triangularView<Eigen::Lower>().solve(k);
    return clamp_variance(1.0 - v.squaredNorm(), 1.0);
}

Vector GPModel::posterior_means(const PointSet& Xs) const {
    if (Xs.rows() != data_.X.rows())
        throw DimensionMismatch("GPModel::posterior_means: point dimension mismatch");
    return cross_gram(kernel_, data_.X, Xs).transpose() * alpha_;
}

void GPModel::posterior_mean_var(const PointSet& Xs, Vector& mean, Vector& var) const {
    if (Xs.rows() != data_.X.rows())
        throw DimensionMismatch("GPModel::posterior_mean_var: point dimension mismatch");
    Matrix Ks = cross_gram(kernel_, data_.X, Xs);
    mean = Ks.transpose() * alpha_;
    Matrix V = L_.triangularView<Eigen::Lower>().solve(Ks);
    const int m = static_cast<int>(Xs.cols());
    var.resize(m);
    for (int j = 0; j < m; ++j) var[j] = clamp_variance(1.0 - V.col(j).squaredNorm(), 1.0);
}

}  // namespace nfbo
