#pragma once

#include "nfbo/types.hpp"

#include <string>
#include <vector>

namespace nfbo {

/// Built-in benchmarks, stated for maximization: each is the negated
/// textbook minimization form, so the optimum value is exactly 0.
enum class ObjectiveId { Ackley, Rastrigin, Levy, Quadratic1D };

ObjectiveId objective_id_from_string(const std::string& name);
std::string to_string(ObjectiveId id);

/// Standard search box for the benchmark. dim is ignored by Quadratic1D
/// (fixed 1-d on [0,1]); the others default to the 10-d boxes
/// [-32.768, 32.768], [-5.12, 5.12], [-10, 10].
SearchDomain domain_for(ObjectiveId id, int dim = 10);

/// Negated benchmark value at x. Points outside the standard box are
/// clipped (with a once-per-process warning on stderr).
double eval_objective(ObjectiveId id, const Vector& x);

struct BenchmarkFunction {
    ObjectiveId id;
    SearchDomain domain;
    double f_star;
    Vector x_star;

    double operator()(const Vector& x) const { return eval_objective(id, x); }
};

BenchmarkFunction make_benchmark(ObjectiveId id, int dim = 10);

/// Black-box objective running as a child process. Protocol, one call per
/// line: the point's coordinates are written whitespace-separated to the
/// child's stdin; the child answers with one decimal on its stdout. The
/// child exiting mid-run is a hard error. Calls are serialized.
class ExternalProcessObjective {
public:
    explicit ExternalProcessObjective(std::vector<std::string> argv);
    ~ExternalProcessObjective();

    ExternalProcessObjective(const ExternalProcessObjective&) = delete;
    ExternalProcessObjective& operator=(const ExternalProcessObjective&) = delete;

    double operator()(const Vector& x);

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace nfbo
