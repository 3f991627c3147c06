#include "bb/metrics.hpp"

#include <algorithm>
#include <set>

#include "bb/errors.hpp"

namespace bb {

SupportMetrics support_metrics(const std::vector<int>& selected, const std::vector<int>& truth) {
    const std::set<int> sel(selected.begin(), selected.end());
    const std::set<int> tru(truth.begin(), truth.end());
    std::size_t hits = 0;
    for (int j : sel)
        if (tru.count(j)) ++hits;
    SupportMetrics out;
    out.selected_size = static_cast<int>(sel.size());
    out.sr_acc = tru.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(tru.size());
    out.sr_fa = static_cast<double>(sel.size() - hits) /
                static_cast<double>(std::max<std::size_t>(sel.size(), 1));
    return out;
}

double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() < 2) throw ConstantResponse();
    const double mean = y_true.mean();
    const double sst = (y_true.array() - mean).square().sum();
    if (sst == 0.0) throw ConstantResponse();
    const double sse = (y_true - y_pred).squaredNorm();
    return 1.0 - sse / sst;
}

double auc(const Eigen::VectorXd& labels, const Eigen::VectorXd& scores) {
    std::vector<double> pos, neg;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        (labels[i] > 0 ? pos : neg).push_back(scores[i]);
    if (pos.empty() || neg.empty()) throw SingleClass();
    std::sort(neg.begin(), neg.end());
    double wins = 0.0;
    for (double s : pos) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
        const auto hi = std::upper_bound(neg.begin(), neg.end(), s);
        wins += static_cast<double>(lo - neg.begin());  // strictly smaller negatives
        wins += 0.5 * static_cast<double>(hi - lo);     // ties
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

TreeStructureMetrics tree_structure_metrics(const DecisionTree& t,
                                            const std::vector<int>& truth) {
    TreeStructureMetrics out;
    out.depth = t.depth();
    const std::vector<int> used = relevant_features(t);
    if (used.empty()) {
        out.fraction_relevant = 1.0;
        return out;
    }
    const std::set<int> tru(truth.begin(), truth.end());
    std::size_t hits = 0;
    for (int j : used)
        if (tru.count(j)) ++hits;
    out.fraction_relevant = static_cast<double>(hits) / static_cast<double>(used.size());
    return out;
}

}  // namespace bb
