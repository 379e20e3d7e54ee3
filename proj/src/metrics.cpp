#include "nfbo/metrics.hpp"

#include "nfbo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfbo {

namespace {

void check_below_optimum(double f_star, const std::vector<double>& values, const char* what) {
    for (double v : values)
        if (!(f_star >= v - 1e-9))
            throw Error(std::string(what) + ": observed value " + std::to_string(v) +
                        " exceeds the stated optimum " + std::to_string(f_star));
}

}  // namespace

std::vector<double> simple_regret(double f_star, const std::vector<double>& iterate_values) {
    check_below_optimum(f_star, iterate_values, "simple_regret");
    std::vector<double> out(iterate_values.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < iterate_values.size(); ++t) {
        best = std::max(best, iterate_values[t]);
        out[t] = f_star - best;
    }
    return out;
}

std::vector<double> cumulative_regret(double f_star, const std::vector<double>& iterate_values) {
    check_below_optimum(f_star, iterate_values, "cumulative_regret");
    std::vector<double> out(iterate_values.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < iterate_values.size(); ++t) {
        sum += f_star - iterate_values[t];
        out[t] = sum;
    }
    return out;
}

double fill_distance(const PointSet& reference, const PointSet& design) {
    if (reference.cols() == 0 || design.cols() == 0)
        throw ConfigError("fill_distance: reference and design must be nonempty");
    if (reference.rows() != design.rows())
        throw DimensionMismatch("fill_distance: dimension mismatch");
    const int n = static_cast<int>(reference.cols());
    Vector nearest(n);
#pragma omp parallel for schedule(static) num_threads(parallel::max_threads())
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < design.cols(); ++j)
            best = std::min(best, (reference.col(i) - design.col(j)).norm());
        nearest[i] = best;
    }
    return nearest.maxCoeff();
}

double fit_rate(const std::vector<int>& counts, const std::vector<double>& values) {
    if (counts.size() != values.size() || counts.size() < 3)
        throw ConfigError("fit_rate: need at least 3 (count, value) pairs");
    const std::size_t n = counts.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] <= 0 || !(values[i] > 0.0))
            throw Error("fit_rate: counts and values must be positive");
        lx[i] = std::log(static_cast<double>(counts[i]));
        ly[i] = std::log(values[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw Error("fit_rate: all counts are equal");
    return sxy / sxx;
}

}  // namespace nfbo
