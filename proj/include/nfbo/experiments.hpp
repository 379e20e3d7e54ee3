#pragma once

#include "nfbo/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nfbo {

/// One experiment run at configurable scale. Zero-valued numeric fields and
/// empty lists mean "use the experiment's default"; resolve_config fills
/// them in (paper-scale defaults when paper_scale is set).
struct ExperimentConfig {
    std::string experiment = "bench";  // bench | filldist | infer-rossler | infer-lorenz
    std::vector<std::string> algorithms;
    std::vector<std::string> benchmarks;  // bench only
    long long eval_budget = 0;
    int replications = 0;
    std::uint64_t seed = 1;
    std::string output_dir = "results";
    bool paper_scale = false;
    int dimension = 0;         // bench / filldist objective dimension
    int initial_design = 0;    // points observed before the loop starts
    int grid_size = 0;         // density grid (Rossler) / comparison nodes (Lorenz)
    int mcmc_iterations = 0;   // Lorenz chain length
    int mcmc_burn_in = 0;      // Lorenz discarded prefix
    int rejection_samples = 0; // Rossler posterior sample count
    double beta_sqrt = 0.0;    // sqrt(beta); 0 in filldist means the sup-norm estimate
    int refit_every = 0;       // hyperparameter refit period
};

ExperimentConfig resolve_config(ExperimentConfig raw);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

const char* version_string();

/// benchmark -> algorithm -> final simple regret per replication.
struct BenchSummary {
    std::map<std::string, std::map<std::string, std::vector<double>>> final_simple_regret;
};

/// algorithm -> final fill distance per replication.
struct FillDistSummary {
    std::map<std::string, std::vector<double>> final_fill_distance;
};

/// strategy -> per-replication density diagnostics.
struct InferSummary {
    std::map<std::string, std::vector<double>> l2;
    std::map<std::string, std::vector<double>> hellinger;  // Rossler experiment only
};

BenchSummary run_bench(const ExperimentConfig& config);
FillDistSummary run_filldist(const ExperimentConfig& config);
InferSummary run_infer(const ExperimentConfig& config);

}  // namespace nfbo
