#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "bb/dataset.hpp"
#include "bb/sparse_linear.hpp"
#include "bb/subproblems.hpp"
#include "bb/trees.hpp"

namespace bb {

struct BackboneConfig {
    int num_subproblems = 10;  // M at the first hierarchy iteration
    double alpha = 1.0;        // screening fraction
    double beta = 0.5;         // subproblem feature fraction
    int backbone_max = 50;     // B_max, target backbone size
    int k_max = 10;            // per-subproblem support cap
    SamplingMode sampling_mode = SamplingMode::ScreeningSample;
    LossKind screen_loss = LossKind::Squared;
    std::uint64_t seed = 0;
    bool early_stop = false;  // stop once two consecutive subproblems add nothing
    double row_fraction = 1.0;
};

using FinalModel = std::variant<std::monostate, RegressorSolution, DecisionTree>;

struct SubproblemRecord {
    int iteration = 0;
    int subproblem = 0;              // m within the iteration
    std::vector<int> features;       // P_m, global feature indices
    std::vector<int> extracted;      // selected support, global indices
};

struct BackboneResult {
    std::vector<int> backbone;  // ascending global feature indices
    std::vector<int> screened;  // the post-screening candidate set
    MarginalUtilities utilities;
    int iterations_used = 0;
    int h_bound = 0;
    std::vector<SubproblemRecord> per_subproblem;
    FinalModel final_model;
    bool empty_backbone_fallback = false;
    bool early_stopped = false;
    bool stalled = false;  // candidate set stopped shrinking above B_max
    double screen_seconds = 0.0;
    double subproblem_seconds = 0.0;
    double final_seconds = 0.0;
};

/// Fits a model on a subproblem dataset (columns already restricted to P_m).
using SubproblemFitter = std::function<std::any(const Dataset&, std::uint64_t seed)>;
/// Extracts the selected feature set as local column indices of the subproblem.
using RelevantExtractor = std::function<std::vector<int>(const std::any&)>;
/// Solves the reduced problem on the backbone columns.
using FinalFitter = std::function<FinalModel(const Dataset&, std::uint64_t seed)>;

/// Hierarchical backbone construction: screen once, then repeatedly fit
/// ceil(M/2^t) subproblems over the current candidate set, union the
/// extracted supports, and shrink the candidate set to that union until it
/// fits within backbone_max. The reduced problem is then solved on the
/// backbone columns by fit_final.
BackboneResult run_backbone(const Dataset& d, const BackboneConfig& cfg,
                            const SubproblemFitter& fit_subproblem,
                            const RelevantExtractor& extract_relevant,
                            const FinalFitter& fit_final);

struct HyperparameterAdvice {
    double alpha = 1.0;
    int num_subproblems = 1;
};

/// Screening fraction and subproblem count from the asymptotic recovery
/// guarantee: alpha = min(1, n^(1-phi)/p) and
/// M = ceil(log(alpha p k) / log(1/(1 - beta + beta p_sub))).
/// With use_empirical_rule, M = ceil(5 + log(alpha p k)/(5 log(1/(1-beta)))).
HyperparameterAdvice recommend_hyperparameters(long n, long p, int k_guess, double beta,
                                               double p_sub_estimate = 0.1, double phi = 0.5,
                                               bool use_empirical_rule = false);

struct BackboneDiagnostics {
    std::vector<double> per_subproblem;  // truth fraction extracted in subproblem m
    std::vector<double> cumulative;      // truth fraction in the union up to m
};

BackboneDiagnostics backbone_diagnostics(const BackboneResult& result,
                                         const std::vector<int>& truth);

}  // namespace bb
