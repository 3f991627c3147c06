#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "bb/dataset.hpp"
#include "bb/screening.hpp"

namespace bb {

struct RegressorSolution {
    Eigen::VectorXd w;         // length p, zeros off support
    std::vector<int> support;  // ascending, { j : w_j != 0 }
    double objective = 0.0;    // cardinality-constrained ridge objective
    double gap = 0.0;          // certified relative gap; 0 for heuristics
    bool certified = false;
    LossKind loss_kind = LossKind::Squared;
    double gamma = 0.0;
    double intercept = 0.0;  // unpenalized, logistic loss only
    bool converged = true;   // false when an iteration cap was hit
};

struct ElasticNetConfig {
    double lambda = 0.0;
    double mu = 1.0;  // 1 = lasso, 0 = ridge
    int max_iters = 2000;
    double tol = 1e-8;
    double coef_threshold = 1e-6;
    LossKind loss = LossKind::Squared;
};

struct SubgradientConfig {
    int k = 1;
    double gamma = 1.0;
    int max_iters = 500;
    double step_scale = 1.0;  // multiplies the calibrated 1/sqrt(t) step
    double tol = 1e-8;
    LossKind loss = LossKind::Squared;
};

struct CuttingPlaneConfig {
    int k = 1;
    double gamma = 1.0;
    double time_limit_sec = 600.0;
    double gap_tol = 1e-6;
    long node_limit = 5'000'000;
    LossKind loss = LossKind::Squared;
};

/// Cardinality-constrained ridge objective: sum_i loss(y_i, w.x_i) + ||w||^2/(2 gamma).
/// Squared loss is (y - t)^2 / 2; logistic is log(1 + exp(-y t)).
/// Shared evaluator; every returned solution's objective re-evaluates with it.
double eval_sparse_objective(const Dataset& d, const Eigen::VectorXd& w, double gamma,
                             LossKind loss);

/// Ridge (or gamma-regularized logistic) restricted to a support set.
RegressorSolution fit_on_support(const Dataset& d, const std::vector<int>& support, double gamma,
                                 LossKind loss);

/// Elastic net by cyclic coordinate descent on
/// (1/n) sum_i loss_i + lambda [ mu ||w||_1 + (1-mu)/2 ||w||_2^2 ].
/// Logistic loss is handled by iteratively reweighted quadratic approximation.
RegressorSolution fit_elastic_net(const Dataset& d, const ElasticNetConfig& cfg);

double elastic_net_lambda_max(const Dataset& d, double mu, LossKind loss);

struct ElasticNetCvStats {
    long grid_fits = 0;       // fits on the (mu, lambda) grid
    long bisection_fits = 0;  // extra fits spent locating lambda_min
};

std::pair<ElasticNetConfig, RegressorSolution> elastic_net_cv(
    const Dataset& d, const SplitIndices& split, const std::vector<double>& mus, int k_max,
    int grid_len, LossKind loss = LossKind::Squared, ElasticNetCvStats* stats = nullptr);

/// Euclidean projection onto { z in [0,1]^p : sum z <= k }.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, int k);

/// Boolean-relaxation subgradient method: ascent on the relaxed support
/// indicator with capped-simplex projection; ridge refit on the k largest
/// indicator entries at the end.
RegressorSolution fit_relaxation_subgradient(const Dataset& d, const SubgradientConfig& cfg,
                                             Eigen::VectorXd* z_out = nullptr);

/// Same, but warm-started from an initial relaxed indicator (projected onto
/// the feasible set first). Pass nullptr for the default uniform start.
RegressorSolution fit_relaxation_subgradient_from(const Dataset& d, const SubgradientConfig& cfg,
                                                  const Eigen::VectorXd* z0,
                                                  Eigen::VectorXd* z_out = nullptr);

/// Exact best-subset solver: outer approximation on the support indicator,
/// master solved by a best-first branch and bound with cut-based bounds.
RegressorSolution fit_exact_cutting_planes(
    const Dataset& d, const CuttingPlaneConfig& cfg,
    const std::optional<std::vector<int>>& warm_start = std::nullopt);

/// Union over Bernoulli roundings of a relaxed indicator, each rounding
/// truncated to the k_max entries with the largest indicator values.
std::vector<int> randomized_rounding(const Eigen::VectorXd& z_relaxed, int rounds, int k_max,
                                     std::uint64_t seed);

enum class SparseSolver { Subgradient, CuttingPlanes };

struct IncrementalKResult {
    int k_star = 0;
    RegressorSolution solution;  // refit on the full training data at k_star
};

/// Incremental support-size cross validation: fits at k0, k0+step, ...,
/// warm-starting each fit from the previous, and stops once two look-ahead
/// steps both improve validation loss by less than rel_tol.
IncrementalKResult cv_incremental_k(const Dataset& d, const SplitIndices& split, int k0,
                                    int k_step, SparseSolver solver, double gamma,
                                    LossKind loss = LossKind::Squared, double rel_tol = 0.01,
                                    int k_cap = 0);

/// Log-spaced grid of length l from gamma0 = p/(k n max_i ||x_i||^2) to 1/sqrt(n).
std::vector<double> gamma_grid(const Dataset& d, int k, int l);

/// Exhaustive oracle over all size-k supports (C(p,k) <= 1e6 guard).
RegressorSolution brute_force_best_subset(const Dataset& d, int k, double gamma,
                                          LossKind loss = LossKind::Squared);

/// Validation loss of a fitted solution (mean squared error or mean
/// logistic deviance on the given rows).
double prediction_loss(const Dataset& d, const std::vector<int>& rows, const Eigen::VectorXd& w,
                       LossKind loss);

}  // namespace bb
