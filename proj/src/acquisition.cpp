#include "nfbo/acquisition.hpp"

#include "nfbo/sampling.hpp"
#include "nfbo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nfbo {

BetaSchedule BetaSchedule::constant(double beta) {
    if (beta < 0.0) throw ConfigError("BetaSchedule: beta must be >= 0");
    return BetaSchedule{Kind::Constant, beta, {}};
}

BetaSchedule BetaSchedule::sup_norm_estimate(PointSet design) {
    if (design.cols() == 0) throw ConfigError("BetaSchedule: sup-norm design set is empty");
    return BetaSchedule{Kind::SupNormEstimate, 0.0, std::move(design)};
}

double resolve_beta(const BetaSchedule& schedule, const Objective& objective) {
    if (schedule.kind == BetaSchedule::Kind::Constant) {
        if (schedule.beta < 0.0) throw ConfigError("resolve_beta: beta must be >= 0");
        return schedule.beta;
    }
    if (schedule.design.cols() == 0) throw ConfigError("resolve_beta: design set is empty");
    double sup = 0.0;
    for (int i = 0; i < schedule.design.cols(); ++i)
        sup = std::max(sup, std::abs(objective(schedule.design.col(i))));
    return sup * sup;
}

AcquisitionSpec AcquisitionSpec::ucb(double beta) {
    if (beta < 0.0) throw ConfigError("AcquisitionSpec: beta must be >= 0");
    return {Kind::UCB, beta, 0.0};
}

AcquisitionSpec AcquisitionSpec::posterior_mean() { return {Kind::PosteriorMean, 0.0, 0.0}; }

AcquisitionSpec AcquisitionSpec::posterior_sd() { return {Kind::PosteriorSD, 0.0, 0.0}; }

AcquisitionSpec AcquisitionSpec::ei(double xi) {
    if (xi < 0.0) throw ConfigError("AcquisitionSpec: xi must be >= 0");
    return {Kind::EI, 0.0, xi};
}

AcquisitionSpec AcquisitionSpec::pi(double xi) {
    if (xi < 0.0) throw ConfigError("AcquisitionSpec: xi must be >= 0");
    return {Kind::PI, 0.0, xi};
}

namespace {

double combine(const AcquisitionSpec& acq, double mean, double var, double best) {
    switch (acq.kind) {
        case AcquisitionSpec::Kind::UCB:
            return mean + std::sqrt(acq.beta) * std::sqrt(var);
        case AcquisitionSpec::Kind::PosteriorMean:
            return mean;
        case AcquisitionSpec::Kind::PosteriorSD:
            return std::sqrt(var);
        case AcquisitionSpec::Kind::EI: {
            double gain = mean - best - acq.xi;
            double sd = std::sqrt(var);
            if (sd > 0.0) {
                double z = gain / sd;
                return gain * normal_cdf(z) + sd * normal_pdf(z);
            }
            return std::max(gain, 0.0);
        }
        case AcquisitionSpec::Kind::PI: {
            double gain = mean - best - acq.xi;
            double sd = std::sqrt(var);
            if (sd > 0.0) return normal_cdf(gain / sd);
            return gain > 0.0 ? 1.0 : 0.0;
        }
    }
    throw Error("score: unknown acquisition kind");
}

bool needs_variance(const AcquisitionSpec& acq) {
    return acq.kind != AcquisitionSpec::Kind::PosteriorMean;
}

}  // namespace

double score(const AcquisitionSpec& acq, const GPModel& model, const Vector& x, double best) {
    double mean = acq.kind == AcquisitionSpec::Kind::PosteriorSD ? 0.0 : model.posterior_mean(x);
    double var = needs_variance(acq) ? model.posterior_var(x) : 0.0;
    return combine(acq, mean, var, best);
}

Vector score_batch(const AcquisitionSpec& acq, const GPModel& model, const PointSet& Xs,
                   double best) {
    Vector mean, var;
    if (needs_variance(acq)) {
        model.posterior_mean_var(Xs, mean, var);
    } else {
        mean = model.posterior_means(Xs);
        var = Vector::Zero(Xs.cols());
    }
    Vector out(Xs.cols());
    for (int j = 0; j < out.size(); ++j) out[j] = combine(acq, mean[j], var[j], best);
    return out;
}

int MaximizerBudget::resolved_pool(int dim) const {
    if (pool > 0) return pool;
    return std::min(500 * dim, 5000);
}

Vector maximize(const AcquisitionSpec& acq, const GPModel& model, const SearchDomain& domain,
                const MaximizerBudget& budget, RandomStream& rng) {
    domain.validate();
    const int d = domain.dim();
    const int pool_n = budget.resolved_pool(d);
    if (pool_n < 1) throw ConfigError("maximize: candidate pool must be nonempty");

    // The pool is drawn before any model access so that different
    // acquisitions consume the rng identically.
    PointSet pool = latin_hypercube(domain, pool_n, rng);
    const double best_obs = model.data().F.maxCoeff();
    Vector scores = score_batch(acq, model, pool, best_obs);

    std::vector<int> order(pool_n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // ties keep the lowest candidate index
    });

    Vector best_x = pool.col(order[0]);
    double best_score = scores[order[0]];

    const int starts = std::min(budget.starts, pool_n);
    for (int s = 0; s < starts; ++s) {
        Vector x = pool.col(order[s]);
        double fx = scores[order[s]];
        Vector step(d);
        for (int j = 0; j < d; ++j) step[j] = budget.initial_step_fraction * domain.side(j);
        for (int h = 0; h < budget.halvings; ++h) {
            for (int j = 0; j < d; ++j) {
                for (double dir : {1.0, -1.0}) {
                    Vector y = x;
                    y[j] = std::clamp(x[j] + dir * step[j], domain.lo[j], domain.hi[j]);
                    if (y[j] == x[j]) continue;
                    double fy = score(acq, model, y, best_obs);
                    if (fy > fx) {
                        x = y;
                        fx = fy;
                    }
                }
            }
            step *= 0.5;
        }
        if (fx > best_score) {
            best_score = fx;
            best_x = x;
        }
    }
    return best_x;
}

}  // namespace nfbo
