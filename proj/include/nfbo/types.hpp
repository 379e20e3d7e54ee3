#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nfbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points are stored as columns of a d x n matrix throughout the library.
using PointSet = Eigen::MatrixXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct DuplicatePoints : Error {
    using Error::Error;
};

struct FactorizationFailure : Error {
    using Error::Error;
};

struct BudgetExhausted : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// Axis-aligned box search domain with lo < hi per dimension.
struct SearchDomain {
    Vector lo;
    Vector hi;

    SearchDomain() = default;
    SearchDomain(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        validate();
    }

    /// Symmetric cube [-half, half]^d.
    static SearchDomain cube(int dim, double half) {
        return SearchDomain(Vector::Constant(dim, -half), Vector::Constant(dim, half));
    }

    int dim() const { return static_cast<int>(lo.size()); }

    double side(int i) const { return hi[i] - lo[i]; }

    /// Euclidean diameter of the box.
    double diameter() const { return (hi - lo).norm(); }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim(); ++i) v *= side(i);
        return v;
    }

    Vector center() const { return 0.5 * (lo + hi); }

    bool contains(const Vector& x, double tol = 0.0) const {
        if (x.size() != lo.size()) return false;
        for (int i = 0; i < dim(); ++i) {
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        }
        return true;
    }

    Vector clip(const Vector& x) const {
        return x.cwiseMax(lo).cwiseMin(hi);
    }

    void validate() const {
        if (lo.size() != hi.size() || lo.size() == 0)
            throw ConfigError("SearchDomain: lo/hi must be nonempty and of equal dimension");
        for (int i = 0; i < dim(); ++i) {
            if (!(lo[i] < hi[i]))
                throw ConfigError("SearchDomain: lo[" + std::to_string(i) + "] must be < hi[" +
                                  std::to_string(i) + "]");
        }
    }
};

inline void require_finite(const Vector& x, const char* what) {
    if (!x.allFinite()) throw Error(std::string(what) + ": non-finite coordinates");
}

}  // namespace nfbo
