#include "nfbo/bo_loops.hpp"

#include "nfbo/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace nfbo {

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "gpucb") return Algorithm::GPUCB;
    if (name == "gpucb+" || name == "gpucbplus") return Algorithm::GPUCBPlus;
    if (name == "exploit+" || name == "exploitplus") return Algorithm::ExploitPlus;
    if (name == "exploit") return Algorithm::Exploit;
    if (name == "explore") return Algorithm::Explore;
    if (name == "uniform") return Algorithm::Uniform;
    if (name == "ei") return Algorithm::EI;
    if (name == "pi") return Algorithm::PI;
    throw ConfigError("unknown algorithm: " + name);
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::GPUCB: return "gpucb";
        case Algorithm::GPUCBPlus: return "gpucb+";
        case Algorithm::ExploitPlus: return "exploit+";
        case Algorithm::Exploit: return "exploit";
        case Algorithm::Explore: return "explore";
        case Algorithm::Uniform: return "uniform";
        case Algorithm::EI: return "ei";
        case Algorithm::PI: return "pi";
    }
    throw ConfigError("unknown algorithm");
}

bool is_two_query(Algorithm a) {
    return a == Algorithm::GPUCBPlus || a == Algorithm::ExploitPlus;
}

Vector ExplorationDistribution::sample(const SearchDomain& domain, RandomStream& rng) const {
    Vector x = sampler ? sampler(domain, rng) : Vector(uniform_box(domain, 1, rng).col(0));
    if (!domain.contains(x))
        throw Error("ExplorationDistribution: sampler returned a point outside the domain");
    return x;
}

void BOConfig::validate() const {
    domain.validate();
    kernel.validate();
    if (T < 0) throw ConfigError("BOConfig: T must be >= 0");
    if (initial_design.cols() == 0) throw ConfigError("BOConfig: initial design is empty");
    if (initial_design.rows() != domain.dim())
        throw ConfigError("BOConfig: initial design dimension does not match the domain");
    for (int i = 0; i < initial_design.cols(); ++i)
        if (!domain.contains(initial_design.col(i), 1e-12 * domain.diameter()))
            throw ConfigError("BOConfig: initial design point " + std::to_string(i) +
                              " is outside the domain");
    if (refit_every < 1) throw ConfigError("BOConfig: refit_every must be >= 1");
    if (xi < 0.0) throw ConfigError("BOConfig: xi must be >= 0");
}

namespace {

AcquisitionSpec acquisition_for(Algorithm a, double beta, double xi) {
    switch (a) {
        case Algorithm::GPUCB:
        case Algorithm::GPUCBPlus: return AcquisitionSpec::ucb(beta);
        case Algorithm::ExploitPlus:
        case Algorithm::Exploit: return AcquisitionSpec::posterior_mean();
        case Algorithm::Explore: return AcquisitionSpec::posterior_sd();
        case Algorithm::EI: return AcquisitionSpec::ei(xi);
        case Algorithm::PI: return AcquisitionSpec::pi(xi);
        case Algorithm::Uniform: break;
    }
    throw Error("acquisition_for: algorithm has no acquisition");
}

bool duplicates_training_point(const GPModel& model, const Vector& x, double tol) {
    for (int i = 0; i < model.data().X.cols(); ++i)
        if ((model.data().X.col(i) - x).norm() <= tol) return true;
    return false;
}

}  // namespace

BORun run(const BOConfig& config, const Objective& objective) {
    config.validate();
    if (!objective) throw ConfigError("run: objective is empty");
    RandomStream rng(config.seed);
    const double dup_tol = 1e-12 * config.domain.diameter();
    const int d = config.domain.dim();
    const int n0 = static_cast<int>(config.initial_design.cols());
    const bool two_query = is_two_query(config.algorithm);
    const int queries = n0 + config.T * (two_query ? 2 : 1);

    BORun out;
    out.iterates.resize(d, config.T);
    out.exploration_points.resize(d, two_query ? config.T : 0);
    out.queried_points.resize(d, queries);
    out.observations.reserve(queries);
    out.iterate_values.reserve(config.T);
    out.per_iteration_best.reserve(config.T);

    const double beta = (config.algorithm == Algorithm::GPUCB ||
                         config.algorithm == Algorithm::GPUCBPlus)
                            ? resolve_beta(config.beta, objective)
                            : 0.0;

    TrainingSet data{config.initial_design, Vector(n0)};
    for (int i = 0; i < n0; ++i) {
        data.F[i] = objective(data.X.col(i));
        out.queried_points.col(i) = data.X.col(i);
        out.observations.push_back(data.F[i]);
    }
    out.evaluations_used = n0;

    const std::vector<double> grid = config.lengthscale_grid.empty()
                                         ? default_lengthscale_grid(config.domain.diameter())
                                         : config.lengthscale_grid;
    KernelSpec kernel = config.kernel;
    if (data.size() >= 2) {
        kernel = fit_hyperparameters(kernel, data.X, data.F, grid);
        out.lengthscale_history.push_back(kernel.lengthscale);
    }
    GPModel model = GPModel::fit(kernel, data, 0.0, dup_tol);

    double best = data.F.maxCoeff();
    int col = n0;
    for (int t = 1; t <= config.T; ++t) {
        // Acquisition proposal (or a plain P draw for UNIFORM).
        Vector x = config.algorithm == Algorithm::Uniform
                       ? config.P.sample(config.domain, rng)
                       : maximize(acquisition_for(config.algorithm, beta, config.xi), model,
                                  config.domain, config.maximizer, rng);
        for (int attempt = 0; duplicates_training_point(model, x, dup_tol); ++attempt) {
            if (attempt >= 100) throw Error("run: could not draw a non-duplicate proposal");
            x = config.P.sample(config.domain, rng);
            ++out.duplicates_resampled;
        }
        double fx = objective(x);
        out.iterates.col(t - 1) = x;
        out.iterate_values.push_back(fx);
        out.queried_points.col(col) = x;
        out.observations.push_back(fx);
        ++col;
        ++out.evaluations_used;
        model = model.update(x, fx);
        best = std::max(best, fx);

        if (two_query) {
            Vector xt = config.P.sample(config.domain, rng);
            for (int attempt = 0; duplicates_training_point(model, xt, dup_tol); ++attempt) {
                if (attempt >= 100) throw Error("run: could not draw a non-duplicate proposal");
                xt = config.P.sample(config.domain, rng);
                ++out.duplicates_resampled;
            }
            double fxt = objective(xt);
            out.exploration_points.col(t - 1) = xt;
            out.queried_points.col(col) = xt;
            out.observations.push_back(fxt);
            ++col;
            ++out.evaluations_used;
            model = model.update(xt, fxt);
            best = std::max(best, fxt);
        }
        out.per_iteration_best.push_back(best);

        if (t % config.refit_every == 0 && model.size() >= 2) {
            kernel = fit_hyperparameters(kernel, model.data().X, model.data().F, grid);
            out.lengthscale_history.push_back(kernel.lengthscale);
            model = GPModel::fit(kernel, model.data(), 0.0, dup_tol);
        }
    }
    out.final_model = std::move(model);
    return out;
}

struct BudgetedObjective::State {
    Objective f;
    long long budget = 0;
    long long used = 0;
};

BudgetedObjective::BudgetedObjective(Objective f, long long budget) : state_(new State) {
    if (!f) throw ConfigError("BudgetedObjective: empty objective");
    if (budget < 0) throw ConfigError("BudgetedObjective: budget must be >= 0");
    state_->f = std::move(f);
    state_->budget = budget;
}

double BudgetedObjective::operator()(const Vector& x) const {
    if (state_->used >= state_->budget)
        throw BudgetExhausted("objective evaluation budget of " +
                              std::to_string(state_->budget) + " exhausted");
    ++state_->used;
    return state_->f(x);
}

long long BudgetedObjective::used() const { return state_->used; }

long long BudgetedObjective::budget() const { return state_->budget; }

int planned_iterations(Algorithm a, long long budget, int n_init) {
    if (budget < 0 || n_init < 0) throw ConfigError("planned_iterations: negative input");
    long long remaining = budget - n_init;
    if (remaining < 0)
        throw ConfigError("planned_iterations: budget smaller than the initial design");
    if (!is_two_query(a)) return static_cast<int>(remaining);
    if (remaining % 2 != 0)
        throw ConfigError("planned_iterations: two-query algorithms need an even number of "
                          "observations after the initial design (got " +
                          std::to_string(remaining) + ")");
    return static_cast<int>(remaining / 2);
}

int default_initial_design_size(int dim) {
    if (dim < 1) throw ConfigError("default_initial_design_size: dim must be >= 1");
    return dim == 1 ? 2 : std::max(2, dim);
}

}  // namespace nfbo
