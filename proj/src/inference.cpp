#include "nfbo/inference.hpp"

#include "nfbo/acquisition.hpp"
#include "nfbo/parallel.hpp"
#include "nfbo/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

namespace nfbo {

namespace {

constexpr int kRejectionChunk = 256;
constexpr double kEnvelopeInflation = 1.05;
constexpr double kMinAcceptanceRate = 1e-4;
constexpr long long kAcceptanceProbation = 1000000;

void check_weighted_sizes(const Vector& values, const Vector& weights) {
    if (weights.size() == 0) throw ConfigError("quadrature weights are empty");
    if (values.size() != weights.size()) {
        throw DimensionMismatch("values and quadrature weights differ in length");
    }
}

}  // namespace

EnergyFunction EnergyFunction::rossler(Vector data, Vector gamma_diag) {
    EnergyFunction V{std::move(data), std::move(gamma_diag), Vector::Constant(1, 6.0),
                     Vector::Constant(1, 4.0), ForwardMap(ForwardMapSpec::rossler())};
    V.validate();
    return V;
}

EnergyFunction EnergyFunction::lorenz63(Vector data, Vector gamma_diag) {
    Vector m0(3);
    m0 << 10.0, 28.5, 2.7;
    Vector P(3);
    P << 0.25, 2.25, 0.49;
    EnergyFunction V{std::move(data), std::move(gamma_diag), std::move(m0), std::move(P),
                     ForwardMap(ForwardMapSpec::lorenz63())};
    V.validate();
    return V;
}

void EnergyFunction::validate() const {
    require_finite(data, "data vector");
    if (data.size() != 9) throw DimensionMismatch("data vector must have nine entries");
    if (gamma_diag.size() != 9) throw DimensionMismatch("gamma diagonal must have nine entries");
    for (Eigen::Index i = 0; i < gamma_diag.size(); ++i) {
        if (!(gamma_diag[i] > 0.0)) throw ConfigError("gamma diagonal must be positive");
    }
    if (prior_mean.size() != prior_cov.size()) {
        throw DimensionMismatch("prior mean and covariance diagonal differ in length");
    }
    for (Eigen::Index i = 0; i < prior_cov.size(); ++i) {
        if (!(prior_cov[i] > 0.0)) throw ConfigError("prior covariance must be positive");
    }
}

double energy(const EnergyFunction& V, const Vector& x) {
    if (x.size() != V.prior_mean.size()) {
        throw DimensionMismatch("parameter and prior dimensions differ");
    }
    const Vector g = V.forward(x);
    double misfit = 0.0;
    for (Eigen::Index i = 0; i < 9; ++i) {
        const double r = V.data[i] - g[i];
        misfit += r * r / V.gamma_diag[i];
    }
    double prior = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = x[i] - V.prior_mean[i];
        prior += r * r / V.prior_cov[i];
    }
    return -0.5 * misfit - 0.5 * prior;
}

EvaluationGrid trapezoid_grid(const SearchDomain& domain, int n_nodes) {
    domain.validate();
    if (domain.dim() != 1) throw ConfigError("trapezoid grid requires a one-dimensional domain");
    if (n_nodes < 2) throw ConfigError("trapezoid grid needs at least two nodes");
    const double lo = domain.lo[0], hi = domain.hi[0];
    const double h = (hi - lo) / (n_nodes - 1);
    EvaluationGrid grid;
    grid.nodes.resize(1, n_nodes);
    grid.weights.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        grid.nodes(0, i) = i + 1 == n_nodes ? hi : lo + h * i;
        grid.weights[i] = (i == 0 || i + 1 == n_nodes) ? 0.5 * h : h;
    }
    return grid;
}

EvaluationGrid midpoint_grid(const SearchDomain& domain, int nodes_per_dim) {
    domain.validate();
    if (nodes_per_dim < 1) throw ConfigError("midpoint grid needs at least one node per axis");
    const int d = domain.dim();
    double total = 1.0;
    for (int k = 0; k < d; ++k) total *= nodes_per_dim;
    if (total > 4e7) throw ConfigError("midpoint grid would be too large");
    const auto n = static_cast<Eigen::Index>(total);
    EvaluationGrid grid;
    grid.nodes.resize(d, n);
    grid.weights = Vector::Constant(n, domain.volume() / total);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index rest = i;
        for (int k = 0; k < d; ++k) {
            const auto idx = rest % nodes_per_dim;
            rest /= nodes_per_dim;
            const double side = domain.side(k) / nodes_per_dim;
            grid.nodes(k, i) = domain.lo[k] + side * (static_cast<double>(idx) + 0.5);
        }
    }
    return grid;
}

EvaluationGrid lhs_grid(const SearchDomain& domain, int n_nodes, RandomStream& rng) {
    EvaluationGrid grid;
    grid.nodes = latin_hypercube(domain, n_nodes, rng);
    return grid;
}

double log_sum_exp_quadrature(const Vector& log_values, const Vector& weights) {
    check_weighted_sizes(log_values, weights);
    const double m = log_values.maxCoeff();
    if (!std::isfinite(m)) throw Error("log values have no finite maximum");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < log_values.size(); ++i) {
        sum += weights[i] * std::exp(log_values[i] - m);
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) throw Error("quadrature sum is not positive");
    return m + std::log(sum);
}

Vector normalized_density(const Vector& log_values, const Vector& weights) {
    const double log_z = log_sum_exp_quadrature(log_values, weights);
    Vector density(log_values.size());
    for (Eigen::Index i = 0; i < log_values.size(); ++i) {
        density[i] = std::exp(log_values[i] - log_z);
    }
    return density;
}

Vector energy_values(const EnergyFunction& V, const PointSet& nodes) {
    const Eigen::Index n = nodes.cols();
    Vector values(n);
    std::atomic<long> failures{0};
#pragma omp parallel for schedule(dynamic, 16) num_threads(parallel::max_threads())
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
    if (failures.load() * 100 > n) {
        throw Error("more than 1% of grid energy evaluations failed");
    }
    return values;
}

Vector true_density_oracle(const EnergyFunction& V, const EvaluationGrid& grid) {
    const Vector values = energy_values(V, grid.nodes);
    if (grid.weights.size() > 0) return normalized_density(values, grid.weights);
    return values.array().exp();
}

double normalize(const GPModel& surrogate_mean, const EvaluationGrid& grid) {
    if (grid.weights.size() == 0) {
        throw ConfigError("normalization needs a grid with quadrature weights");
    }
    const Vector mu = surrogate_mean.posterior_means(grid.nodes);
    const double log_z = log_sum_exp_quadrature(mu, grid.weights);
    // log Z is bracketed by the extreme exponents plus log of the total
    // weight; a violation indicates an arithmetic bug.
    const double log_vol = std::log(grid.weights.sum());
    if (log_z > mu.maxCoeff() + log_vol + 1e-9 || log_z < mu.minCoeff() + log_vol - 1e-9) {
        throw Error("normalization left its a-priori bracket");
    }
    const double z = std::exp(log_z);
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw Error("normalization constant is not a positive finite number");
    }
    return z;
}

double hellinger(const Vector& p, const Vector& q, const Vector& weights) {
    check_weighted_sizes(p, weights);
    check_weighted_sizes(q, weights);
    double mass_p = 0.0, mass_q = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw Error("densities must be nonnegative");
        mass_p += weights[i] * p[i];
        mass_q += weights[i] * q[i];
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        sum += weights[i] * d * d;
    }
    if (std::abs(mass_p - 1.0) > 1e-3 || std::abs(mass_q - 1.0) > 1e-3) {
        throw Error("densities must be normalized on the grid");
    }
    return std::clamp(std::sqrt(0.5 * sum), 0.0, 1.0);
}

double l2_grid_difference(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("density vectors differ in length");
    return (a - b).norm();
}

SurrogatePosterior build_surrogate(const EnergyFunction& V, const BOConfig& strategy,
                                   long long eval_budget, EvaluationGrid grid) {
    switch (strategy.algorithm) {
        case Algorithm::GPUCB:
        case Algorithm::GPUCBPlus:
        case Algorithm::ExploitPlus:
        case Algorithm::Uniform:
            break;
        default:
            throw ConfigError("surrogate construction supports GPUCB, GPUCB+, EXPLOIT+, and "
                              "Uniform strategies");
    }
    BOConfig config = strategy;
    config.T = planned_iterations(config.algorithm, eval_budget,
                                  static_cast<int>(config.initial_design.cols()));
    BORun run = nfbo::run(config, [&V](const Vector& x) { return energy(V, x); });
    if (!run.final_model.has_value()) {
        throw Error("optimization run produced no surrogate model");
    }
    GPModel model = *run.final_model;
    const double z = normalize(model, grid);
    return SurrogatePosterior{std::move(model), config.domain, std::move(grid), z, std::log(z),
                              std::move(run)};
}

RejectionResult rejection_sample(const BatchLogDensity& log_density, const SearchDomain& domain,
                                 int n, double log_envelope, RandomStream& rng) {
    domain.validate();
    if (n <= 0) throw ConfigError("sample count must be positive");
    if (!std::isfinite(log_envelope)) throw ConfigError("envelope must be finite");
    const int d = domain.dim();

    RejectionResult result;
    result.samples.resize(d, n);
    int accepted = 0;
    PointSet proposals(d, kRejectionChunk);
    Vector thresholds(kRejectionChunk);
    while (accepted < n) {
        for (int c = 0; c < kRejectionChunk; ++c) {
            for (int k = 0; k < d; ++k) {
                proposals(k, c) = rng.uniform(domain.lo[k], domain.hi[k]);
            }
            thresholds[c] = rng.uniform01();
        }
        const Vector values = log_density(proposals);
        if (values.size() != kRejectionChunk) {
            throw DimensionMismatch("log density returned the wrong number of values");
        }
        for (int c = 0; c < kRejectionChunk && accepted < n; ++c) {
            if (values[c] > log_envelope + 1e-9) {
                throw Error("rejection envelope violated by the target density");
            }
            if (thresholds[c] < std::exp(values[c] - log_envelope)) {
                result.samples.col(accepted++) = proposals.col(c);
            }
        }
        result.proposals += kRejectionChunk;
        if (result.proposals >= kAcceptanceProbation &&
            static_cast<double>(accepted) < kMinAcceptanceRate *
                                                static_cast<double>(result.proposals)) {
            throw Error("rejection sampler acceptance rate collapsed; envelope or target is "
                        "pathologically peaked");
        }
    }
    result.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(result.proposals);
    return result;
}

RejectionResult rejection_sample(const SurrogatePosterior& surrogate, int n, RandomStream& rng) {
    const Vector arg_max = maximize(AcquisitionSpec::posterior_mean(), surrogate.surrogate_mean,
                                    surrogate.domain, MaximizerBudget{}, rng);
    const double log_envelope =
        surrogate.surrogate_mean.posterior_mean(arg_max) + std::log(kEnvelopeInflation);
    const GPModel& model = surrogate.surrogate_mean;
    return rejection_sample(
        [&model](const PointSet& points) { return model.posterior_means(points); },
        surrogate.domain, n, log_envelope, rng);
}

MHResult rwmh_sample(const std::function<double(const Vector&)>& log_density,
                     const SearchDomain& domain, int n_iter, int burn_in,
                     const Vector& step_cov_diag, RandomStream& rng) {
    domain.validate();
    if (n_iter <= 0 || burn_in < 0 || burn_in >= n_iter) {
        throw ConfigError("chain needs 0 <= burn_in < n_iter");
    }
    const int d = domain.dim();
    if (step_cov_diag.size() != d) throw DimensionMismatch("step covariance has wrong dimension");
    Vector step_sd(d);
    for (int k = 0; k < d; ++k) {
        if (!(step_cov_diag[k] > 0.0)) throw ConfigError("step covariance must be positive");
        step_sd[k] = std::sqrt(step_cov_diag[k]);
    }

    MHResult result;
    result.chain.resize(d, n_iter - burn_in);
    Vector x = domain.center();
    double lx = log_density(x);
    long long accepted = 0;
    Vector proposal(d);
    for (int t = 0; t < n_iter; ++t) {
        for (int k = 0; k < d; ++k) proposal[k] = x[k] + step_sd[k] * rng.normal();
        const double u = rng.uniform01();
        if (domain.contains(proposal)) {
            const double lp = log_density(proposal);
            if (u == 0.0 || std::log(u) < lp - lx) {
                x = proposal;
                lx = lp;
                ++accepted;
            }
        }
        if (t >= burn_in) result.chain.col(t - burn_in) = x;
    }
    result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_iter);
    return result;
}

MHResult rwmh_sample(const SurrogatePosterior& surrogate, int n_iter, int burn_in,
                     const Vector& step_cov_diag, RandomStream& rng) {
    const GPModel& model = surrogate.surrogate_mean;
    return rwmh_sample([&model](const Vector& x) { return model.posterior_mean(x); },
                       surrogate.domain, n_iter, burn_in, step_cov_diag, rng);
}

}  // namespace nfbo
