#pragma once

#include "nfbo/rng.hpp"
#include "nfbo/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace nfbo {

/// The two calibration targets. Both use the initial state (1, 0, 1).
struct ODESystem {
    enum class Kind { Rossler, Lorenz63 } kind = Kind::Rossler;
    Vector params;  // Rossler: (x); Lorenz: (x1, x2, x3)
    Vector z0;

    static ODESystem rossler(double x);
    static ODESystem lorenz63(double x1, double x2, double x3);
};

/// Time derivative at state z.
Vector rhs(const ODESystem& system, const Vector& z);

struct IntegratorConfig {
    double rtol = 1e-6;
    double atol = 1e-9;
    double output_dt = 0.01;  // uniform sampling step of the returned grid
    double max_step = 0.0;    // adaptive mode step cap; 0 means unlimited
    /// 0: adaptive Dormand-Prince 5(4) with PI step control and dense output.
    /// m > 0: m equal substeps per output cell. The step sequence then does
    /// not depend on the tolerances, which keeps long chaotic averages
    /// reproducible across tolerance levels; the embedded error estimate is
    /// still checked against rtol/atol on every substep.
    int substeps = 0;

    void validate(double t0, double t1) const;
};

/// States sampled on the uniform grid t0, t0+dt, ..., t1 (columns).
struct Trajectory {
    std::vector<double> times;
    Matrix states;  // k x |times|
};

Trajectory integrate(const ODESystem& system, double t0, double t1,
                     const IntegratorConfig& config);

/// Same integrator for an arbitrary autonomous right-hand side (used by the
/// scalar validation problems).
Trajectory integrate_generic(const std::function<Vector(const Vector&)>& f, const Vector& z0,
                             double t0, double t1, const IntegratorConfig& config);

/// Time averages over [w0, w1] by the trapezoidal rule on the trajectory
/// grid, in the fixed component order
///   (mean z1, mean z2, mean z3,
///    mean z1^2, mean z2^2, mean z3^2,
///    mean z1 z2, mean z1 z3, mean z2 z3).
Vector averaging_operator(const Trajectory& traj, double w0, double w1);

/// Sample variances (over the grid nodes in [w0, w1]) of the nine averaged
/// integrands, in the same component order.
Vector moment_variances(const Trajectory& traj, double w0, double w1);

struct ForwardMapSpec {
    ODESystem::Kind system = ODESystem::Kind::Rossler;
    double window_start = 20.0;
    double window_end = 50.0;
    IntegratorConfig integrator;

    /// Window [20, 50]; fixed 2-substep cells.
    static ForwardMapSpec rossler();
    /// Window [10, 200]; fixed 8-substep cells.
    static ForwardMapSpec lorenz63();

    ODESystem bind(const Vector& x) const;
};

/// The parameter-to-moments map: integrate from t = 0, average over the
/// window. Results are cached per exact parameter value; the cache is safe
/// for concurrent access.
class ForwardMap {
public:
    explicit ForwardMap(ForwardMapSpec spec);

    Vector operator()(const Vector& x) const;
    const ForwardMapSpec& spec() const { return spec_; }

private:
    struct Cache;
    ForwardMapSpec spec_;
    std::shared_ptr<Cache> cache_;
};

/// Diagonal of the data covariance: scale x sample variance of each summary
/// integrand over the long window, computed at the true parameter. Throws
/// (naming the component) if any variance vanishes.
Vector estimate_gamma(const ForwardMapSpec& spec, const Vector& x_star, double long_window_start,
                      double long_window_end, double scale);

/// Synthetic observation D = G(x_star) + eta with independent Gaussian noise
/// of the given diagonal covariance.
Vector make_data(const ForwardMap& G, const Vector& x_star, const Vector& gamma_diag,
                 RandomStream& rng);

}  // namespace nfbo
