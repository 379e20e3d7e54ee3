#include "nfbo/experiments.hpp"
#include "nfbo/types.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::string canonical_experiment(std::string name) {
    if (name == "rossler") return "infer-rossler";
    if (name == "lorenz") return "infer-lorenz";
    return name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-free Bayesian optimization experiments"};
    app.set_version_flag("--version", std::string(nfbo::version_string()));
    app.require_subcommand(1);

    std::string config_path;
    std::string experiment;
    std::vector<std::string> algorithms;
    long long budget = 0;
    int reps = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool paper = false;
    bool print_config = false;

    auto add_common = [&](CLI::App* sub, bool is_infer) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        if (is_infer)
            sub->add_option("--experiment", experiment,
                            "calibration problem: rossler (default) or lorenz");
        sub->add_option("--budget", budget, "total objective evaluations per run");
        sub->add_option("--reps", reps, "independent replications");
        sub->add_option("--seed", seed, "root seed (replication seeds are derived from it)");
        sub->add_option("--algorithms", algorithms, "comma-separated algorithm list")
            ->delimiter(',');
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--paper-scale", paper, "use paper-scale defaults");
        sub->add_flag("--print-config", print_config, "print the resolved config and exit");
    };
    add_common(app.add_subcommand("bench", "regret curves on synthetic benchmarks"), false);
    add_common(app.add_subcommand("filldist", "fill distance of the query set"), false);
    add_common(app.add_subcommand("infer", "ODE parameter surrogate posterior"), true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 2;
    }

    try {
        nfbo::ExperimentConfig config;
        bool file_sets_experiment = false;
        std::string file_experiment;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw nfbo::ConfigError("cannot open config file " + config_path);
            const nlohmann::json j = nlohmann::json::parse(in);
            config = nfbo::config_from_json(j);
            if (j.contains("experiment")) {
                file_sets_experiment = true;
                file_experiment = canonical_experiment(j.at("experiment").get<std::string>());
            }
        }

        const CLI::App* sub = app.get_subcommands().front();
        std::string target;
        if (sub->get_name() == "bench" || sub->get_name() == "filldist") {
            target = sub->get_name();
        } else {
            if (!experiment.empty()) target = canonical_experiment(experiment);
            else if (file_sets_experiment) target = file_experiment;
            else target = "infer-rossler";
            if (target != "infer-rossler" && target != "infer-lorenz")
                throw nfbo::ConfigError("infer expects experiment rossler or lorenz, got '" +
                                        target + "'");
        }
        if (file_sets_experiment && file_experiment != target)
            throw nfbo::ConfigError("config file experiment '" + file_experiment +
                                    "' conflicts with the requested '" + target + "'");
        config.experiment = target;

        if (sub->count("--budget")) config.eval_budget = budget;
        if (sub->count("--reps")) config.replications = reps;
        if (sub->count("--seed")) config.seed = seed;
        if (!algorithms.empty()) config.algorithms = algorithms;
        if (sub->count("--out")) config.output_dir = out_dir;
        if (paper) config.paper_scale = true;

        const nfbo::ExperimentConfig resolved = nfbo::resolve_config(config);
        if (print_config) {
            std::cout << nfbo::to_json(resolved).dump(2) << '\n';
            return 0;
        }

        if (resolved.experiment == "bench") nfbo::run_bench(resolved);
        else if (resolved.experiment == "filldist") nfbo::run_filldist(resolved);
        else nfbo::run_infer(resolved);
        return 0;
    } catch (const nfbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
