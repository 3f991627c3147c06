#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bb/dataset.hpp"
#include "bb/trees.hpp"

namespace bb {

struct LinearGroundTruth {
    Eigen::VectorXd w_true;    // entries in {-1,0,+1}
    std::vector<int> support;  // strictly increasing, size k
    double snr = 0.0;
    double rho = 0.0;
    double sigma = 0.0;  // realized noise scale
};

struct TreeGenConfig {
    int depth = 3;        // D
    int k = 3;            // relevant feature count
    int r = 1;            // min split occurrences per relevant feature
    double balance = 0.5; // f
    int num_classes = 2;  // K
};

struct TreeGroundTruth {
    DecisionTree tree;          // full binary tree of depth D
    std::vector<int> relevant;  // ascending
};

/// Rows iid N(0, Sigma) with Sigma_ij = rho^|i-j|, generated streaming per
/// row via the AR(1) recurrence x_j = rho*x_{j-1} + sqrt(1-rho^2)*z_j.
Eigen::MatrixXd gen_design(int n, int p, double rho, std::uint64_t seed);

/// y = X w_true + eps with the noise rescaled so that the realized ratio
/// ||X w_true|| / ||eps|| equals sqrt(snr) exactly.
std::pair<Dataset, LinearGroundTruth> gen_linear(int n, int p, int k, double rho, double snr,
                                                 std::uint64_t seed);

/// Same construction with y = sign(X w_true + eps); sign(0) resolves to +1.
std::pair<Dataset, LinearGroundTruth> gen_logistic(int n, int p, int k, double rho, double snr,
                                                   std::uint64_t seed);

/// Fresh design + response for an existing planted model (test sets).
Dataset gen_linear_from_truth(int n, int p, const LinearGroundTruth& truth, std::uint64_t seed);
Dataset gen_logistic_from_truth(int n, int p, const LinearGroundTruth& truth, std::uint64_t seed);

/// Generates a random full binary ground-truth tree of depth cfg.depth and
/// labels each row of a fresh design matrix by traversing it.
std::pair<Dataset, TreeGroundTruth> gen_tree_data(int n, int p, const TreeGenConfig& cfg,
                                                  double rho, std::uint64_t seed);

/// Labels a fresh design matrix with an existing ground-truth tree.
Dataset gen_tree_data_from_truth(int n, int p, const TreeGroundTruth& truth, double rho,
                                 std::uint64_t seed);

}  // namespace bb
