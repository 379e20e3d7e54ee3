#pragma once

#include "nfbo/gp.hpp"
#include "nfbo/rng.hpp"
#include "nfbo/types.hpp"

#include <functional>

namespace nfbo {

using Objective = std::function<double(const Vector&)>;

/// How the UCB weight beta is obtained: a fixed constant, or the squared
/// sup-norm estimate max_{x in X_D} |f(x)|^2 over a design set X_D.
struct BetaSchedule {
    enum class Kind { Constant, SupNormEstimate } kind = Kind::Constant;
    double beta = 0.0;
    PointSet design;  // X_D, used by SupNormEstimate only

    static BetaSchedule constant(double beta);
    static BetaSchedule sup_norm_estimate(PointSet design);
};

/// Evaluates the schedule. SupNormEstimate queries the objective on every
/// design point; callers account these evaluations as design budget, not
/// optimization budget.
double resolve_beta(const BetaSchedule& schedule, const Objective& objective);

struct AcquisitionSpec {
    enum class Kind { UCB, PosteriorMean, PosteriorSD, EI, PI } kind = Kind::PosteriorMean;
    double beta = 0.0;  // UCB weight (already resolved)
    double xi = 0.0;    // EI/PI improvement margin

    static AcquisitionSpec ucb(double beta);
    static AcquisitionSpec posterior_mean();
    static AcquisitionSpec posterior_sd();
    static AcquisitionSpec ei(double xi = 0.0);
    static AcquisitionSpec pi(double xi = 0.0);
};

/// Acquisition value at x. best (the largest observed value) only matters
/// for EI/PI. UCB returns mean + sqrt(beta) * sd.
double score(const AcquisitionSpec& acq, const GPModel& model, const Vector& x, double best);

/// Scores every column of Xs in one pass (batch GP prediction).
Vector score_batch(const AcquisitionSpec& acq, const GPModel& model, const PointSet& Xs,
                   double best);

struct MaximizerBudget {
    int pool = 0;    // candidate pool size; 0 means the default 500*d capped at 5000
    int starts = 5;  // refinement starts taken from the top-scored candidates
    int halvings = 10;
    double initial_step_fraction = 0.1;  // of each side length

    int resolved_pool(int dim) const;
};

/// Global maximization of the acquisition surface: a Latin hypercube pool is
/// scored in batch, then the best `starts` candidates are refined by
/// coordinate descent with a step that halves `halvings` times. The pool is
/// drawn before any scoring, so the rng consumption does not depend on the
/// acquisition kind. Ties keep the lowest candidate index.
Vector maximize(const AcquisitionSpec& acq, const GPModel& model, const SearchDomain& domain,
                const MaximizerBudget& budget, RandomStream& rng);

}  // namespace nfbo
