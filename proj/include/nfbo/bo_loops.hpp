#pragma once

#include "nfbo/acquisition.hpp"
#include "nfbo/gp.hpp"
#include "nfbo/rng.hpp"
#include "nfbo/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nfbo {

enum class Algorithm { GPUCB, GPUCBPlus, ExploitPlus, Exploit, Explore, Uniform, EI, PI };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);

/// True for the algorithms that query two points per iteration
/// (acquisition point plus an independent exploration point).
bool is_two_query(Algorithm a);

/// The exploration measure P. The default (empty sampler) is uniform on the
/// search domain; a custom sampler must return points inside the domain.
struct ExplorationDistribution {
    std::function<Vector(const SearchDomain&, RandomStream&)> sampler;

    Vector sample(const SearchDomain& domain, RandomStream& rng) const;
};

struct BOConfig {
    Algorithm algorithm = Algorithm::GPUCB;
    int T = 0;                  // iteration count
    SearchDomain domain;
    PointSet initial_design;    // nonempty, inside the domain
    KernelSpec kernel;
    BetaSchedule beta;          // UCB variants only
    double xi = 0.0;            // EI/PI margin
    ExplorationDistribution P;
    int refit_every = 5;        // hyperparameter refit period (iterations)
    std::vector<double> lengthscale_grid;  // empty: default grid from the domain diameter
    MaximizerBudget maximizer;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BORun {
    PointSet iterates;                    // x_1..x_T (columns)
    PointSet exploration_points;          // x~_1..x~_T for two-query algorithms, else empty
    PointSet queried_points;              // initial design then every query, in query order
    std::vector<double> observations;     // aligned with queried_points
    std::vector<double> iterate_values;   // f(x_t), aligned with iterates
    std::vector<double> per_iteration_best;
    long long evaluations_used = 0;
    int duplicates_resampled = 0;
    std::vector<double> lengthscale_history;  // one entry per hyperparameter fit
    std::optional<GPModel> final_model;
};

/// Runs one optimization loop. Every iteration proposes the algorithm's
/// acquisition point (and, for the two-query algorithms, an extra draw from
/// P), observes the objective there, and folds the result into the model.
/// A proposal that duplicates a training point is replaced by a fresh draw
/// from P (counted in duplicates_resampled). Hyperparameters are fit on the
/// initial design and refit every refit_every iterations whenever at least
/// two points are available. Deterministic in config.seed.
///
/// A SupNormEstimate beta schedule is resolved against `objective` here;
/// callers that must keep those design evaluations outside an evaluation
/// budget should resolve the schedule beforehand and pass a constant.
BORun run(const BOConfig& config, const Objective& objective);

/// Objective wrapper that throws BudgetExhausted once `budget` calls have
/// been made. Copies share the underlying counter.
class BudgetedObjective {
public:
    BudgetedObjective(Objective f, long long budget);

    double operator()(const Vector& x) const;
    long long used() const;
    long long budget() const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

/// Iterations affordable with `budget` total observations after n_init
/// initial-design observations: budget - n_init for one-query algorithms,
/// (budget - n_init) / 2 (exactly divisible) for two-query ones.
int planned_iterations(Algorithm a, long long budget, int n_init);

/// Default initial-design size: 2 points in 1-d, max(2, d) otherwise.
int default_initial_design_size(int dim);

}  // namespace nfbo
