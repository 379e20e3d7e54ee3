#pragma once

#include "nfbo/types.hpp"

#include <vector>

namespace nfbo {

/// Simple regret curve: entry t is f_star - max of the first t+1 values.
/// Requires f_star >= every value (up to 1e-9 slack). Nonincreasing.
std::vector<double> simple_regret(double f_star, const std::vector<double>& iterate_values);

/// Cumulative regret curve: entry t is the running sum of f_star - value.
/// Nondecreasing under the same precondition.
std::vector<double> cumulative_regret(double f_star, const std::vector<double>& iterate_values);

/// max over reference columns of the distance to the nearest design column.
double fill_distance(const PointSet& reference, const PointSet& design);

/// Least-squares slope of log(values) against log(counts).
double fit_rate(const std::vector<int>& counts, const std::vector<double>& values);

}  // namespace nfbo
