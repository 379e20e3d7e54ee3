#include "nfbo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <string>

namespace nfbo {

namespace {

const char* const kComponentNames[9] = {"z1",    "z2",    "z3",    "z1^2", "z2^2",
                                        "z3^2",  "z1 z2", "z1 z3", "z2 z3"};

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
// Difference between the 5th- and the embedded 4th-order weights.
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
// Dense-output weights for the quartic interpolant.
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

using RhsFn = std::function<Vector(const Vector&)>;

struct Stepper {
    RhsFn f;
    double rtol = 0.0;
    double atol = 0.0;

    Vector k1, k2, k3, k4, k5, k6, k7;
    Vector y_new;

    explicit Stepper(RhsFn fn, const IntegratorConfig& config)
        : f(std::move(fn)), rtol(config.rtol), atol(config.atol) {}

    // Advances the trial solution from (t, y) by h into y_new / k7 and
    // returns the scaled error norm. Expects k1 = f(y) (FSAL).
    double attempt(const Vector& y, double h) {
        k2 = f(y + h * (kA21 * k1));
        k3 = f(y + h * (kA31 * k1 + kA32 * k2));
        k4 = f(y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
        k5 = f(y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
        k6 = f(y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
        y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        k7 = f(y_new);
        const Vector err_vec =
            h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            const double ratio = err_vec[i] / scale;
            sum += ratio * ratio;
        }
        return std::sqrt(sum / static_cast<double>(y.size()));
    }
};

double output_time(double t0, double dt, std::ptrdiff_t index) { //
    return t0 + dt * static_cast<double>(index);
}

void integrate_adaptive(Stepper& stepper, double t0, double t1, const IntegratorConfig& config,
                        Trajectory& out) {
    const double dt = config.output_dt;
    const std::ptrdiff_t n_cells = out.states.cols() - 1;
    Vector y = out.states.col(0);
    stepper.k1 = stepper.f(y);

    double t = t0;
    double h_next = dt;
    if (config.max_step > 0.0) h_next = std::min(h_next, config.max_step);
    double errold = 1e-4;
    std::ptrdiff_t next_out = 1;
    long attempts = 0;

    while (next_out <= n_cells) {
        double h = std::min(h_next, t1 - t);
        if (config.max_step > 0.0) h = std::min(h, config.max_step);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw Error("integrator step size underflow at t = " + std::to_string(t));
        }
        if (++attempts > 100000000L) {
            throw Error("integrator exceeded the step-attempt limit");
        }

        const double err = stepper.attempt(y, h);
        if (err <= 1.0) {
            // Quartic interpolant over the accepted step for the grid nodes
            // inside it; nodes hitting the right endpoint take y_new exactly.
            const Vector rcont1 = y;
            const Vector rcont2 = stepper.y_new - y;
            const Vector rcont3 = h * stepper.k1 - rcont2;
            const Vector rcont4 = rcont2 - h * stepper.k7 - rcont3;
            const Vector rcont5 = h * (kD1 * stepper.k1 + kD3 * stepper.k3 + kD4 * stepper.k4 +
                                       kD5 * stepper.k5 + kD6 * stepper.k6 + kD7 * stepper.k7);
            const double t_end = t + h;
            while (next_out <= n_cells) {
                const double t_out = output_time(t0, dt, next_out);
                if (t_out > t_end + 1e-12 * std::max(1.0, std::abs(t_end))) break;
                if (t_out >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
                    out.states.col(next_out) = stepper.y_new;
                } else {
                    const double theta = (t_out - t) / h;
                    const double omt = 1.0 - theta;
                    out.states.col(next_out) =
                        rcont1 + theta * (rcont2 + omt * (rcont3 + theta * (rcont4 + omt * rcont5)));
                }
                ++next_out;
            }
            t = t_end;
            y = stepper.y_new;
            stepper.k1 = stepper.k7;  // first-same-as-last
            double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) * std::pow(errold, 0.08) : 10.0;
            fac = std::clamp(fac, 0.2, 10.0);
            h_next = h * fac;
            errold = std::max(err, 1e-4);
        } else {
            const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            h_next = h * fac;
        }
    }
}

void integrate_fixed(Stepper& stepper, double t0, const IntegratorConfig& config,
                     Trajectory& out) {
    const double dt = config.output_dt;
    const std::ptrdiff_t n_cells = out.states.cols() - 1;
    const int m = config.substeps;
    const double h = dt / static_cast<double>(m);
    Vector y = out.states.col(0);
    stepper.k1 = stepper.f(y);

    for (std::ptrdiff_t cell = 0; cell < n_cells; ++cell) {
        for (int j = 0; j < m; ++j) {
            const double err = stepper.attempt(y, h);
            if (err > 1.0) {
                const double t = output_time(t0, dt, cell) + h * j;
                throw Error("fixed-substep error estimate exceeds tolerance at t = " +
                            std::to_string(t) + "; increase substeps");
            }
            y = stepper.y_new;
            stepper.k1 = stepper.k7;
        }
        out.states.col(cell + 1) = y;
    }
}

Trajectory integrate_core(const RhsFn& f, const Vector& z0, double t0, double t1,
                          const IntegratorConfig& config) {
    config.validate(t0, t1);
    require_finite(z0, "initial state");
    if (z0.size() == 0) throw ConfigError("initial state must be nonempty");

    const std::ptrdiff_t n_cells =
        static_cast<std::ptrdiff_t>(std::llround((t1 - t0) / config.output_dt));
    Trajectory out;
    out.times.resize(static_cast<std::size_t>(n_cells) + 1);
    for (std::ptrdiff_t k = 0; k <= n_cells; ++k) {
        out.times[static_cast<std::size_t>(k)] = output_time(t0, config.output_dt, k);
    }
    out.times.back() = t1;
    out.states.resize(z0.size(), n_cells + 1);
    out.states.col(0) = z0;

    Stepper stepper(f, config);
    if (config.substeps > 0) {
        integrate_fixed(stepper, t0, config, out);
    } else {
        integrate_adaptive(stepper, t0, t1, config, out);
    }
    require_finite(out.states.col(n_cells), "integrated state");
    return out;
}

// Index range [i0, i1] of grid nodes covered by the window.
std::pair<std::ptrdiff_t, std::ptrdiff_t> window_range(const Trajectory& traj, double w0,
                                                       double w1) {
    if (!(w0 < w1)) throw ConfigError("averaging window must have positive length");
    if (traj.times.size() < 2) throw ConfigError("trajectory has fewer than two grid nodes");
    const double tol = 1e-6 * (traj.times[1] - traj.times[0]);
    if (w0 < traj.times.front() - tol || w1 > traj.times.back() + tol) {
        throw ConfigError("averaging window lies outside the trajectory support");
    }
    std::ptrdiff_t i0 = 0;
    while (traj.times[static_cast<std::size_t>(i0)] < w0 - tol) ++i0;
    std::ptrdiff_t i1 = static_cast<std::ptrdiff_t>(traj.times.size()) - 1;
    while (traj.times[static_cast<std::size_t>(i1)] > w1 + tol) --i1;
    if (i1 <= i0) throw ConfigError("averaging window contains fewer than two grid nodes");
    return {i0, i1};
}

double integrand(const Trajectory& traj, int component, std::ptrdiff_t node) {
    const auto& z = traj.states;
    switch (component) {
        case 0: return z(0, node);
        case 1: return z(1, node);
        case 2: return z(2, node);
        case 3: return z(0, node) * z(0, node);
        case 4: return z(1, node) * z(1, node);
        case 5: return z(2, node) * z(2, node);
        case 6: return z(0, node) * z(1, node);
        case 7: return z(0, node) * z(2, node);
        default: return z(1, node) * z(2, node);
    }
}

}  // namespace

ODESystem ODESystem::rossler(double x) {
    ODESystem sys;
    sys.kind = Kind::Rossler;
    sys.params = Vector::Constant(1, x);
    sys.z0 = Vector(3);
    sys.z0 << 1.0, 0.0, 1.0;
    return sys;
}

ODESystem ODESystem::lorenz63(double x1, double x2, double x3) {
    ODESystem sys;
    sys.kind = Kind::Lorenz63;
    sys.params = Vector(3);
    sys.params << x1, x2, x3;
    sys.z0 = Vector(3);
    sys.z0 << 1.0, 0.0, 1.0;
    return sys;
}

Vector rhs(const ODESystem& system, const Vector& z) {
    if (z.size() != 3) throw DimensionMismatch("state must have three components");
    Vector dz(3);
    if (system.kind == ODESystem::Kind::Rossler) {
        const double x = system.params[0];
        dz[0] = -z[1] - z[2];
        dz[1] = z[0] + 0.2 * z[1];
        dz[2] = 0.2 + z[2] * (z[0] - x);
    } else {
        const double x1 = system.params[0], x2 = system.params[1], x3 = system.params[2];
        dz[0] = x1 * (z[1] - z[0]);
        dz[1] = x2 * z[0] - z[1] - z[0] * z[2];
        dz[2] = z[0] * z[1] - x3 * z[2];
    }
    return dz;
}

void IntegratorConfig::validate(double t0, double t1) const {
    if (!(std::isfinite(t0) && std::isfinite(t1))) throw ConfigError("time span must be finite");
    if (!(t1 > t0)) throw ConfigError("integration requires t1 > t0");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("tolerances must be positive");
    if (!(output_dt > 0.0)) throw ConfigError("output_dt must be positive");
    const double span = t1 - t0;
    if (output_dt > span / 100.0 * (1.0 + 1e-12)) {
        throw ConfigError("output_dt must not exceed one hundredth of the time span");
    }
    const double cells = span / output_dt;
    if (std::abs(cells - std::llround(cells)) > 1e-8 * cells) {
        throw ConfigError("output_dt must tile the time span evenly");
    }
    if (substeps < 0) throw ConfigError("substeps must be nonnegative");
    if (max_step < 0.0) throw ConfigError("max_step must be nonnegative");
}

Trajectory integrate(const ODESystem& system, double t0, double t1,
                     const IntegratorConfig& config) {
    return integrate_core([&system](const Vector& z) { return rhs(system, z); }, system.z0, t0, t1,
                          config);
}

Trajectory integrate_generic(const std::function<Vector(const Vector&)>& f, const Vector& z0,
                             double t0, double t1, const IntegratorConfig& config) {
    return integrate_core(f, z0, t0, t1, config);
}

Vector averaging_operator(const Trajectory& traj, double w0, double w1) {
    if (traj.states.rows() != 3) throw DimensionMismatch("moment summaries need a 3-state system");
    const auto [i0, i1] = window_range(traj, w0, w1);
    Vector sums = Vector::Zero(9);
    for (std::ptrdiff_t node = i0; node <= i1; ++node) {
        const double dt_left =
            node > i0 ? traj.times[static_cast<std::size_t>(node)] -
                            traj.times[static_cast<std::size_t>(node - 1)]
                      : 0.0;
        const double dt_right =
            node < i1 ? traj.times[static_cast<std::size_t>(node + 1)] -
                            traj.times[static_cast<std::size_t>(node)]
                      : 0.0;
        const double weight = 0.5 * (dt_left + dt_right);
        for (int c = 0; c < 9; ++c) sums[c] += weight * integrand(traj, c, node);
    }
    const double length = traj.times[static_cast<std::size_t>(i1)] -
                          traj.times[static_cast<std::size_t>(i0)];
    return sums / length;
}

Vector moment_variances(const Trajectory& traj, double w0, double w1) {
    if (traj.states.rows() != 3) throw DimensionMismatch("moment summaries need a 3-state system");
    const auto [i0, i1] = window_range(traj, w0, w1);
    const double n = static_cast<double>(i1 - i0 + 1);
    Vector out(9);
    for (int c = 0; c < 9; ++c) {
        double mean = 0.0;
        for (std::ptrdiff_t node = i0; node <= i1; ++node) mean += integrand(traj, c, node);
        mean /= n;
        double ss = 0.0;
        for (std::ptrdiff_t node = i0; node <= i1; ++node) {
            const double d = integrand(traj, c, node) - mean;
            ss += d * d;
        }
        out[c] = ss / (n - 1.0);
    }
    return out;
}

ForwardMapSpec ForwardMapSpec::rossler() {
    ForwardMapSpec spec;
    spec.system = ODESystem::Kind::Rossler;
    spec.window_start = 20.0;
    spec.window_end = 50.0;
    spec.integrator.substeps = 2;
    return spec;
}

ForwardMapSpec ForwardMapSpec::lorenz63() {
    ForwardMapSpec spec;
    spec.system = ODESystem::Kind::Lorenz63;
    spec.window_start = 10.0;
    spec.window_end = 200.0;
    spec.integrator.substeps = 8;
    return spec;
}

ODESystem ForwardMapSpec::bind(const Vector& x) const {
    require_finite(x, "parameter");
    if (system == ODESystem::Kind::Rossler) {
        if (x.size() != 1) throw DimensionMismatch("Rossler takes a single parameter");
        return ODESystem::rossler(x[0]);
    }
    if (x.size() != 3) throw DimensionMismatch("Lorenz63 takes three parameters");
    return ODESystem::lorenz63(x[0], x[1], x[2]);
}

struct ForwardMap::Cache {
    std::mutex mutex;
    std::map<std::vector<double>, Vector> values;
};

ForwardMap::ForwardMap(ForwardMapSpec spec)
    : spec_(std::move(spec)), cache_(std::make_shared<Cache>()) {
    if (!(spec_.window_start < spec_.window_end)) {
        throw ConfigError("forward map window must have positive length");
    }
    if (!(spec_.window_start >= 0.0)) {
        throw ConfigError("forward map window must start at or after t = 0");
    }
}

Vector ForwardMap::operator()(const Vector& x) const {
    std::vector<double> key(x.data(), x.data() + x.size());
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        const auto it = cache_->values.find(key);
        if (it != cache_->values.end()) return it->second;
    }
    const ODESystem system = spec_.bind(x);
    const Trajectory traj = integrate(system, 0.0, spec_.window_end, spec_.integrator);
    Vector moments = averaging_operator(traj, spec_.window_start, spec_.window_end);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->values.try_emplace(std::move(key), std::move(moments)).first->second;
}

Vector estimate_gamma(const ForwardMapSpec& spec, const Vector& x_star, double long_window_start,
                      double long_window_end, double scale) {
    if (!(scale > 0.0)) throw ConfigError("gamma scale must be positive");
    const ODESystem system = spec.bind(x_star);
    const Trajectory traj = integrate(system, 0.0, long_window_end, spec.integrator);
    Vector variances = moment_variances(traj, long_window_start, long_window_end);
    for (int c = 0; c < 9; ++c) {
        if (!(variances[c] > 0.0)) {
            throw Error(std::string("summary component ") + kComponentNames[c] +
                        " has zero variance over the window");
        }
    }
    return scale * variances;
}

Vector make_data(const ForwardMap& G, const Vector& x_star, const Vector& gamma_diag,
                 RandomStream& rng) {
    if (gamma_diag.size() != 9) throw DimensionMismatch("gamma diagonal must have nine entries");
    for (Eigen::Index i = 0; i < 9; ++i) {
        if (!(gamma_diag[i] >= 0.0)) throw ConfigError("gamma diagonal must be nonnegative");
    }
    Vector data = G(x_star);
    for (Eigen::Index i = 0; i < 9; ++i) {
        data[i] += std::sqrt(gamma_diag[i]) * rng.normal();
    }
    return data;
}

}  // namespace nfbo
