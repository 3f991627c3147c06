#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bb/backbone.hpp"
#include "bb/config.hpp"
#include "bb/dataset.hpp"

namespace bb {

enum class ExperimentKind { SynthLinear, SynthLogistic, SynthTree, RealCsv };
enum class Method { Backbone, SisEnet, ExactSR, Cart, OctLocalSearch, Oracle };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SynthLinear;
    Method method = Method::Backbone;
    std::string name;  // experiment label; defaults to kind-method

    // generator parameters
    int n = 200;
    int p = 1000;
    int k = 10;
    double rho = 0.0;
    double snr = 6.0;
    int tree_depth = 3;
    int tree_r = 1;
    double tree_balance = 0.5;
    int n_test = 2000;

    // real data
    std::string csv_path;
    std::string response_column = "y";
    Task csv_task = Task::Regression;

    // method hyperparameters
    double alpha = 0.0;  // 0 = pick so ceil(alpha p) ~ 10 n
    double beta = 0.5;
    int num_subproblems = 10;
    int backbone_max = 50;
    int k_max = 0;  // 0 = k for linear kinds, 2^depth - 1 for trees
    SamplingMode sampling_mode = SamplingMode::ScreeningSample;
    bool early_stop = false;
    double row_fraction = 1.0;
    int k0 = 5;
    int k_step = 5;
    double rel_tol = 0.01;
    double gamma = 0.0;  // 0 = 1/sqrt(n) of the data being fit
    std::vector<double> mus = {0.0, 0.25, 0.5, 0.75, 1.0};
    int grid_len = 50;
    std::vector<int> depth_grid = {2, 3};
    std::vector<int> nmin_grid = {1, 10};
    std::vector<double> lambda_grid = {0.0, 1.0};
    int restarts = 3;

    // run control
    std::vector<std::uint64_t> seeds = {1};
    double holdout_ratio = 0.7;
    std::string output_path;
    int workers = 1;

    std::uint64_t config_hash = 0;

    static ExperimentConfig from_config(const KeyValueConfig& kv);
    int effective_k_max() const;
};

struct ResultRow {
    std::string experiment;
    std::string seed;  // seed number, or "mean"/"std" for aggregates
    std::string metric;
    double value = 0.0;
};

struct ExperimentResults {
    std::vector<ResultRow> rows;
    int failed_seeds = 0;
};

/// Runs the configured method over every seed (optionally in parallel),
/// appends mean/std aggregate rows, and writes the CSV when an output path
/// is configured. Per-seed failures become `failed` rows, not run aborts.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

void write_results_csv(const std::string& path, const ExperimentResults& results);
std::string results_to_csv(const ExperimentResults& results);

}  // namespace bb
