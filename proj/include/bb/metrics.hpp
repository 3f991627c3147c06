#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bb/trees.hpp"

namespace bb {

struct SupportMetrics {
    double sr_acc = 0.0;  // |selected & truth| / |truth|, 1.0 when truth is empty
    double sr_fa = 0.0;   // |selected \ truth| / max(|selected|, 1)
    int selected_size = 0;
};

SupportMetrics support_metrics(const std::vector<int>& selected, const std::vector<int>& truth);

/// 1 - SSE/SST with SST about the mean of y_true.
double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Mann-Whitney AUC: P(score+ > score-) + P(tie)/2, labels in {-1,+1}.
double auc(const Eigen::VectorXd& labels, const Eigen::VectorXd& scores);

struct TreeStructureMetrics {
    double fraction_relevant = 1.0;  // 1.0 for a root leaf by convention
    int depth = 0;
};

TreeStructureMetrics tree_structure_metrics(const DecisionTree& t, const std::vector<int>& truth);

}  // namespace bb
