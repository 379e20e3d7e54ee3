#pragma once

#include "nfbo/bo_loops.hpp"
#include "nfbo/dynamics.hpp"
#include "nfbo/gp.hpp"
#include "nfbo/rng.hpp"
#include "nfbo/types.hpp"

#include <functional>

namespace nfbo {

/// Log posterior density (up to a constant) of an ODE parameter:
///   -1/2 ||D - G(x)||^2_Gamma - 1/2 ||x - m0||^2_P
/// with diagonal Gamma and P and the forward map G of the bound system.
struct EnergyFunction {
    Vector data;        // D
    Vector gamma_diag;  // positive diagonal of Gamma
    Vector prior_mean;  // m0
    Vector prior_cov;   // positive diagonal of P
    ForwardMap forward;

    /// Rossler calibration prior: N(6, 4), i.e. a -(1/8)(x-6)^2 log term.
    static EnergyFunction rossler(Vector data, Vector gamma_diag);
    /// Lorenz63 calibration prior: N((10, 28.5, 2.7), diag(0.25, 2.25, 0.49)).
    static EnergyFunction lorenz63(Vector data, Vector gamma_diag);

    void validate() const;
};

double energy(const EnergyFunction& V, const Vector& x);

/// Quadrature / comparison nodes. Empty weights mark a plain node set with
/// no integration rule attached (used for unnormalized comparisons).
struct EvaluationGrid {
    PointSet nodes;
    Vector weights;
};

EvaluationGrid trapezoid_grid(const SearchDomain& domain, int n_nodes);
EvaluationGrid midpoint_grid(const SearchDomain& domain, int nodes_per_dim);
EvaluationGrid lhs_grid(const SearchDomain& domain, int n_nodes, RandomStream& rng);

/// log sum_i w_i exp(v_i), stabilized by the max element.
double log_sum_exp_quadrature(const Vector& log_values, const Vector& weights);

/// Density values p_i = exp(v_i) / sum_j w_j exp(v_j); sums to one under the
/// weights by construction.
Vector normalized_density(const Vector& log_values, const Vector& weights);

/// Energies at each node. Integration failures are reported on stderr and
/// yield -inf entries; more than 1% of failing nodes aborts.
Vector energy_values(const EnergyFunction& V, const PointSet& nodes);

/// The reference density for diagnostics: normalized over a weighted grid,
/// plain exp(V) over a weightless node set.
Vector true_density_oracle(const EnergyFunction& V, const EvaluationGrid& grid);

/// Z = integral of exp(posterior mean) over the grid.
double normalize(const GPModel& surrogate_mean, const EvaluationGrid& grid);

double hellinger(const Vector& p, const Vector& q, const Vector& weights);
double l2_grid_difference(const Vector& a, const Vector& b);

/// exp(mu) / Z on the stored grid, where mu is a GP posterior mean fit to
/// every queried energy evaluation of one optimization run.
struct SurrogatePosterior {
    GPModel surrogate_mean;
    SearchDomain domain;
    EvaluationGrid grid;
    double Z = 0.0;
    double log_Z = 0.0;
    BORun run;
};

/// Runs the configured optimization loop on the energy under `eval_budget`
/// total evaluations (config.T is derived from the budget), fits the
/// surrogate on all queried points, and normalizes it on `grid`. Supported
/// strategies: GPUCB, GPUCBPlus, ExploitPlus, Uniform.
SurrogatePosterior build_surrogate(const EnergyFunction& V, const BOConfig& strategy,
                                   long long eval_budget, EvaluationGrid grid);

using BatchLogDensity = std::function<Vector(const PointSet&)>;

struct RejectionResult {
    PointSet samples;
    double acceptance_rate = 0.0;
    long long proposals = 0;
};

/// Uniform-proposal rejection sampling with acceptance exp(v(x) - log_envelope).
/// Aborts once the running acceptance rate drops below 1e-4 over at least
/// 1e6 proposals, and errors if the envelope is ever observed violated.
RejectionResult rejection_sample(const BatchLogDensity& log_density, const SearchDomain& domain,
                                 int n, double log_envelope, RandomStream& rng);

/// Envelope = surrogate maximum (found by the acquisition maximizer)
/// inflated by 5%.
RejectionResult rejection_sample(const SurrogatePosterior& surrogate, int n, RandomStream& rng);

struct MHResult {
    PointSet chain;  // post-burn-in states, one column per kept iteration
    double acceptance_rate = 0.0;
};

/// Random-walk Metropolis-Hastings from the domain center with independent
/// Gaussian steps of the given per-coordinate variances. Proposals outside
/// the domain are rejected outright.
MHResult rwmh_sample(const std::function<double(const Vector&)>& log_density,
                     const SearchDomain& domain, int n_iter, int burn_in,
                     const Vector& step_cov_diag, RandomStream& rng);

MHResult rwmh_sample(const SurrogatePosterior& surrogate, int n_iter, int burn_in,
                     const Vector& step_cov_diag, RandomStream& rng);

}  // namespace nfbo
