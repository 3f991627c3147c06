#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bb/dataset.hpp"

namespace bb {

enum class Impurity { Gini, Entropy, Misclassification };

/// Axis-aligned binary classification tree stored as a flat node array.
/// Class labels are 0-based ids; `to_class_ids` maps Dataset responses.
struct DecisionTree {
    struct Node {
        bool is_leaf = true;
        int feature = -1;
        double threshold = 0.0;
        int label = 0;                // majority class id (leaves)
        std::vector<long> counts;    // per-class training counts (leaves)
        int left = -1;
        int right = -1;
    };
    std::vector<Node> nodes;  // root at index 0
    int num_classes = 2;

    bool empty() const { return nodes.empty(); }
    int depth() const;
    int num_branch_nodes() const;
    int num_leaves() const;
};

struct TreeParams {
    int max_depth = 3;
    int min_bucket = 1;
    double complexity_weight = 0.0;  // lambda, on the misclassification-count scale
    Impurity impurity = Impurity::Gini;
};

/// Maps a classification response vector to contiguous class ids.
/// Binary {-1,+1} maps to {0,1}; multi-class labels 1..K map to 0..K-1.
std::vector<int> to_class_ids(const Dataset& d, int* num_classes_out = nullptr);

/// Greedy top-down induction (midpoint thresholds, exhaustive split search)
/// followed by exact cost-complexity pruning of the grown tree.
DecisionTree fit_cart(const Dataset& d, const TreeParams& params);

/// Randomized-restart local search on g(T) = misclassification count +
/// lambda * #branch nodes. The first restart starts from the CART tree.
DecisionTree fit_oct_local_search(const Dataset& d, const TreeParams& params, int restarts,
                                  std::uint64_t seed);

/// Class-id predictions; routing rule: x_j < b goes left, ties go right.
std::vector<int> predict(const DecisionTree& t, const Eigen::MatrixXd& X);
/// Per-row probability of the given class, taken from leaf class frequencies.
Eigen::VectorXd predict_scores(const DecisionTree& t, const Eigen::MatrixXd& X,
                               int class_id = 1);

/// Distinct features appearing in at least one branch node, ascending.
std::vector<int> relevant_features(const DecisionTree& t);

/// Misclassification count of the tree on (X, y_ids).
long misclassification_count(const DecisionTree& t, const Eigen::MatrixXd& X,
                             const std::vector<int>& y_ids);
/// g(T) = misclassification count + lambda * #branch nodes.
double tree_objective(const DecisionTree& t, const Eigen::MatrixXd& X,
                      const std::vector<int>& y_ids, double lambda);

enum class TreeMethod { Cart, OctLocalSearch };

std::pair<TreeParams, DecisionTree> cv_tree(const Dataset& d, const SplitIndices& split,
                                            const std::vector<int>& depth_grid,
                                            const std::vector<int>& nmin_grid,
                                            const std::vector<double>& lambda_grid,
                                            TreeMethod method, int restarts = 3,
                                            std::uint64_t seed = 0);

/// Text format: one node per line, indentation = depth,
/// "branch j b" / "leaf c n0 n1 ...". print/parse round-trip exactly.
std::string print_tree(const DecisionTree& t);
DecisionTree parse_tree(const std::string& text);

}  // namespace bb
