#include "bb/trees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bb/errors.hpp"
#include "bb/rng.hpp"

namespace bb {

namespace {

int node_depth_below(const DecisionTree& t, int idx) {
    const auto& n = t.nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf) return 0;
    return 1 + std::max(node_depth_below(t, n.left), node_depth_below(t, n.right));
}

}  // namespace

int DecisionTree::depth() const { return nodes.empty() ? 0 : node_depth_below(*this, 0); }

int DecisionTree::num_branch_nodes() const {
    int c = 0;
    for (const auto& n : nodes) c += n.is_leaf ? 0 : 1;
    return c;
}

int DecisionTree::num_leaves() const {
    int c = 0;
    for (const auto& n : nodes) c += n.is_leaf ? 1 : 0;
    return c;
}

std::vector<int> to_class_ids(const Dataset& d, int* num_classes_out) {
    std::vector<int> ids(static_cast<std::size_t>(d.n()));
    int num_classes = 2;
    if (d.task == Task::BinaryClassification) {
        for (Eigen::Index i = 0; i < d.n(); ++i)
            ids[static_cast<std::size_t>(i)] = d.y[i] > 0 ? 1 : 0;
    } else if (d.task == Task::MultiClassification) {
        int max_label = 1;
        for (Eigen::Index i = 0; i < d.n(); ++i) {
            const int label = static_cast<int>(std::lround(d.y[i]));
            if (label < 1) throw ContractViolation("multi-class labels must be in 1..K");
            ids[static_cast<std::size_t>(i)] = label - 1;
            max_label = std::max(max_label, label);
        }
        num_classes = std::max(max_label, 2);
    } else {
        throw std::invalid_argument("tree fitting requires a classification task");
    }
    if (num_classes_out) *num_classes_out = num_classes;
    return ids;
}

namespace {

double impurity_value(const std::vector<long>& counts, long total, Impurity kind) {
    if (total == 0) return 0.0;
    double v = 0.0;
    long best = 0;
    for (long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        switch (kind) {
            case Impurity::Gini: v += p * (1.0 - p); break;
            case Impurity::Entropy: v -= p * std::log2(p); break;
            case Impurity::Misclassification: best = std::max(best, c); break;
        }
    }
    if (kind == Impurity::Misclassification)
        v = 1.0 - static_cast<double>(best) / static_cast<double>(total);
    return v;
}

int majority_class(const std::vector<long>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

long leaf_errors(const std::vector<long>& counts) {
    long total = 0, best = 0;
    for (long c : counts) {
        total += c;
        best = std::max(best, c);
    }
    return total - best;
}

/// Column-wise row orders (ascending value, ties by row), computed once per fit.
std::vector<std::vector<int>> column_orders(const Eigen::MatrixXd& X) {
    std::vector<std::vector<int>> orders(static_cast<std::size_t>(X.cols()));
    std::vector<int> base(static_cast<std::size_t>(X.rows()));
    std::iota(base.begin(), base.end(), 0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        auto& ord = orders[static_cast<std::size_t>(j)];
        ord = base;
        std::stable_sort(ord.begin(), ord.end(),
                         [&X, j](int a, int b) { return X(a, j) < X(b, j); });
    }
    return orders;
}

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity (count scale)
    long errors = 0;     // misclassifications of the stump with majority leaves
};

/// Exhaustive best stump over midpoint thresholds, honoring min_bucket.
/// Score ties broken by (lower feature, lower threshold).
SplitCandidate best_split(const Eigen::MatrixXd& X, const std::vector<int>& y_ids,
                          const std::vector<bool>& in_node,
                          const std::vector<std::vector<int>>& orders, int num_classes,
                          int min_bucket, Impurity kind) {
    SplitCandidate best;
    std::vector<long> total_counts(static_cast<std::size_t>(num_classes), 0);
    long total = 0;
    for (std::size_t i = 0; i < in_node.size(); ++i)
        if (in_node[i]) {
            ++total_counts[static_cast<std::size_t>(y_ids[i])];
            ++total;
        }
    if (total < 2 * min_bucket) return best;

    std::vector<long> left(static_cast<std::size_t>(num_classes));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        std::fill(left.begin(), left.end(), 0L);
        long nl = 0;
        const auto& ord = orders[static_cast<std::size_t>(j)];
        double prev_value = 0.0;
        bool have_prev = false;
        for (int row : ord) {
            if (!in_node[static_cast<std::size_t>(row)]) continue;
            const double v = X(row, static_cast<Eigen::Index>(j));
            if (have_prev && v > prev_value && nl >= min_bucket && total - nl >= min_bucket) {
                const double thr = 0.5 * (prev_value + v);
                double score = static_cast<double>(nl) * impurity_value(left, nl, kind);
                std::vector<long> right(static_cast<std::size_t>(num_classes));
                for (std::size_t c = 0; c < right.size(); ++c) right[c] = total_counts[c] - left[c];
                score += static_cast<double>(total - nl) * impurity_value(right, total - nl, kind);
                if (!best.found || score < best.score - 1e-12 ||
                    (std::abs(score - best.score) <= 1e-12 &&
                     (static_cast<int>(j) < best.feature ||
                      (static_cast<int>(j) == best.feature && thr < best.threshold)))) {
                    best.found = true;
                    best.feature = static_cast<int>(j);
                    best.threshold = thr;
                    best.score = score;
                    best.errors = leaf_errors(left) + leaf_errors(right);
                }
            }
            ++left[static_cast<std::size_t>(y_ids[row])];
            ++nl;
            prev_value = v;
            have_prev = true;
        }
    }
    return best;
}

struct CartBuilder {
    const Eigen::MatrixXd& X;
    const std::vector<int>& y_ids;
    const std::vector<std::vector<int>>& orders;
    int num_classes;
    TreeParams params;
    DecisionTree tree;

    int build(std::vector<bool>& in_node, long count, int depth) {
        std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t i = 0; i < in_node.size(); ++i)
            if (in_node[i]) ++counts[static_cast<std::size_t>(y_ids[i])];

        const int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(idx)].counts = counts;
        tree.nodes[static_cast<std::size_t>(idx)].label = majority_class(counts);

        const bool pure = leaf_errors(counts) == 0;
        if (depth >= params.max_depth || pure || count < 2 * params.min_bucket) return idx;
        const SplitCandidate split = best_split(X, y_ids, in_node, orders, num_classes,
                                                params.min_bucket, params.impurity);
        if (!split.found) return idx;

        std::vector<bool> in_left(in_node.size(), false), in_right(in_node.size(), false);
        long nl = 0;
        for (std::size_t i = 0; i < in_node.size(); ++i) {
            if (!in_node[i]) continue;
            if (X(static_cast<Eigen::Index>(i), split.feature) < split.threshold) {
                in_left[i] = true;
                ++nl;
            } else {
                in_right[i] = true;
            }
        }
        in_node.clear();
        in_node.shrink_to_fit();
        const int left = build(in_left, nl, depth + 1);
        const int right = build(in_right, count - nl, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        node.is_leaf = false;
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return idx;
    }
};

/// Exact cost-complexity pruning on the training objective:
/// collapse a branch whenever errors-as-leaf <= subtree cost + lambda per branch.
double prune_rec(DecisionTree& t, int idx, double lambda) {
    auto& node = t.nodes[static_cast<std::size_t>(idx)];
    const double as_leaf = static_cast<double>(leaf_errors(node.counts));
    if (node.is_leaf) return as_leaf;
    const double as_branch =
        prune_rec(t, node.left, lambda) + prune_rec(t, node.right, lambda) + lambda;
    if (as_leaf <= as_branch) {
        node.is_leaf = true;
        node.feature = -1;
        node.left = node.right = -1;
        node.label = majority_class(node.counts);
        return as_leaf;
    }
    return as_branch;
}

/// Drops nodes detached by pruning and renumbers children.
DecisionTree compact(const DecisionTree& t) {
    DecisionTree out;
    out.num_classes = t.num_classes;
    // recursive preorder copy keeps child index assignment simple
    struct Copier {
        const DecisionTree& src;
        DecisionTree& dst;
        int copy(int idx) {
            const auto& n = src.nodes[static_cast<std::size_t>(idx)];
            const int out_idx = static_cast<int>(dst.nodes.size());
            dst.nodes.push_back(n);
            if (!n.is_leaf) {
                const int l = copy(n.left);
                const int r = copy(n.right);
                dst.nodes[static_cast<std::size_t>(out_idx)].left = l;
                dst.nodes[static_cast<std::size_t>(out_idx)].right = r;
            } else {
                dst.nodes[static_cast<std::size_t>(out_idx)].left = -1;
                dst.nodes[static_cast<std::size_t>(out_idx)].right = -1;
            }
            return out_idx;
        }
    } copier{t, out};
    if (!t.empty()) copier.copy(0);
    return out;
}

}  // namespace

DecisionTree fit_cart(const Dataset& d, const TreeParams& params) {
    int num_classes = 2;
    const std::vector<int> y_ids = to_class_ids(d, &num_classes);
    const auto orders = column_orders(d.X);
    CartBuilder builder{d.X, y_ids, orders, num_classes, params, {}};
    builder.tree.num_classes = num_classes;
    std::vector<bool> all(static_cast<std::size_t>(d.n()), true);
    builder.build(all, d.n(), 0);
    prune_rec(builder.tree, 0, params.complexity_weight);
    return compact(builder.tree);
}

namespace {

int route(const DecisionTree& t, const Eigen::MatrixXd& X, Eigen::Index row, int from = 0) {
    int idx = from;
    for (;;) {
        const auto& node = t.nodes[static_cast<std::size_t>(idx)];
        if (node.is_leaf) return idx;
        if (node.feature < 0 || node.feature >= X.cols())
            throw FeatureIndexOutOfRange(node.feature);
        idx = X(row, node.feature) < node.threshold ? node.left : node.right;
    }
}

}  // namespace

std::vector<int> predict(const DecisionTree& t, const Eigen::MatrixXd& X) {
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[static_cast<std::size_t>(i)] = t.nodes[static_cast<std::size_t>(route(t, X, i))].label;
    return out;
}

Eigen::VectorXd predict_scores(const DecisionTree& t, const Eigen::MatrixXd& X, int class_id) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto& leaf = t.nodes[static_cast<std::size_t>(route(t, X, i))];
        long total = 0;
        for (long c : leaf.counts) total += c;
        const long hits = class_id < static_cast<int>(leaf.counts.size())
                              ? leaf.counts[static_cast<std::size_t>(class_id)]
                              : 0;
        out[i] = total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    }
    return out;
}

std::vector<int> relevant_features(const DecisionTree& t) {
    std::vector<int> feats;
    for (const auto& n : t.nodes)
        if (!n.is_leaf) feats.push_back(n.feature);
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
    return feats;
}

long misclassification_count(const DecisionTree& t, const Eigen::MatrixXd& X,
                             const std::vector<int>& y_ids) {
    long errors = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (t.nodes[static_cast<std::size_t>(route(t, X, i))].label !=
            y_ids[static_cast<std::size_t>(i)])
            ++errors;
    return errors;
}

double tree_objective(const DecisionTree& t, const Eigen::MatrixXd& X,
                      const std::vector<int>& y_ids, double lambda) {
    return static_cast<double>(misclassification_count(t, X, y_ids)) +
           lambda * t.num_branch_nodes();
}

// ---------------------------------------------------------------------------
// Local search
// ---------------------------------------------------------------------------

namespace {

struct LocalSearch {
    const Eigen::MatrixXd& X;
    const std::vector<int>& y_ids;
    const std::vector<std::vector<int>>& orders;
    int num_classes;
    TreeParams params;
    DecisionTree tree;
    double g = 0.0;

    long n() const { return X.rows(); }

    /// Recomputes leaf counts and majority labels from scratch and returns g.
    double refresh() {
        for (auto& node : tree.nodes) {
            node.counts.assign(static_cast<std::size_t>(num_classes), 0);
        }
        long errors = 0;
        for (Eigen::Index i = 0; i < n(); ++i) {
            const int leaf = route(tree, X, i);
            ++tree.nodes[static_cast<std::size_t>(leaf)]
                  .counts[static_cast<std::size_t>(y_ids[static_cast<std::size_t>(i)])];
        }
        for (auto& node : tree.nodes)
            if (node.is_leaf) {
                node.label = majority_class(node.counts);
                errors += leaf_errors(node.counts);
            }
        g = static_cast<double>(errors) + params.complexity_weight * tree.num_branch_nodes();
        return g;
    }

    std::vector<bool> members_of(int idx) {
        std::vector<bool> in(static_cast<std::size_t>(n()), false);
        for (Eigen::Index i = 0; i < n(); ++i) {
            int cur = 0;
            for (;;) {
                if (cur == idx) {
                    in[static_cast<std::size_t>(i)] = true;
                    break;
                }
                const auto& node = tree.nodes[static_cast<std::size_t>(cur)];
                if (node.is_leaf) break;
                cur = X(i, node.feature) < node.threshold ? node.left : node.right;
            }
        }
        return in;
    }

    int depth_of(int idx) {
        // walk from root recording depth
        struct Finder {
            const DecisionTree& t;
            int target;
            int found = -1;
            void visit(int idx, int depth) {
                if (found >= 0) return;
                if (idx == target) {
                    found = depth;
                    return;
                }
                const auto& n = t.nodes[static_cast<std::size_t>(idx)];
                if (!n.is_leaf) {
                    visit(n.left, depth + 1);
                    visit(n.right, depth + 1);
                }
            }
        } f{tree, idx};
        f.visit(0, 0);
        return f.found;
    }

    void subtree_stats(int idx, int* branches, long* errors) {
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        if (node.is_leaf) {
            *errors += leaf_errors(node.counts);
            return;
        }
        ++*branches;
        subtree_stats(node.left, branches, errors);
        subtree_stats(node.right, branches, errors);
    }

    void collect_leaves(int idx, std::vector<int>* leaves) {
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        if (node.is_leaf) {
            leaves->push_back(idx);
            return;
        }
        collect_leaves(node.left, leaves);
        collect_leaves(node.right, leaves);
    }

    struct Move {
        enum Kind { None, Replace, Delete, SplitLeaf } kind = None;
        int node = -1;
        int feature = -1;
        double threshold = 0.0;
        double delta = 0.0;  // predicted change in g (fixed labels)
    };

    /// Best split-parameter replacement at a branch node: for every feature,
    /// sweep midpoint thresholds moving points from the right-subtree routing
    /// to the left-subtree routing. Per-leaf class counts are maintained so
    /// the swept error is the exact post-relabel subtree error.
    Move best_replace(int idx, const std::vector<bool>& in_node) {
        Move move;
        move.kind = Move::Replace;
        move.node = idx;
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        std::vector<int> rows;
        for (std::size_t i = 0; i < in_node.size(); ++i)
            if (in_node[i]) rows.push_back(static_cast<int>(i));
        if (rows.empty()) return {};

        // destination leaf per member for each side of the split
        std::vector<int> leaf_l(in_node.size(), -1), leaf_r(in_node.size(), -1);
        for (int row : rows) {
            leaf_l[static_cast<std::size_t>(row)] = route(tree, X, row, node.left);
            leaf_r[static_cast<std::size_t>(row)] = route(tree, X, row, node.right);
        }
        std::vector<int> leaves;
        collect_leaves(node.left, &leaves);
        collect_leaves(node.right, &leaves);
        std::vector<int> slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < leaves.size(); ++s)
            slot[static_cast<std::size_t>(leaves[s])] = static_cast<int>(s);
        const std::size_t nleaves = leaves.size();
        const std::size_t K = static_cast<std::size_t>(num_classes);

        long err_current = 0;
        {
            int branches = 0;
            subtree_stats(idx, &branches, &err_current);
        }

        std::vector<long> cnt(nleaves * K);
        std::vector<long> total(nleaves), top(nleaves);
        bool found = false;
        long best_err = 0;
        int best_feature = -1;
        double best_thr = 0.0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            // start with every member routed right
            std::fill(cnt.begin(), cnt.end(), 0L);
            std::fill(total.begin(), total.end(), 0L);
            for (int row : rows) {
                const auto s = static_cast<std::size_t>(
                    slot[static_cast<std::size_t>(leaf_r[static_cast<std::size_t>(row)])]);
                ++cnt[s * K + static_cast<std::size_t>(y_ids[static_cast<std::size_t>(row)])];
                ++total[s];
            }
            long err = 0;
            int violations = 0;
            for (std::size_t s = 0; s < nleaves; ++s) {
                top[s] = *std::max_element(cnt.begin() + static_cast<std::ptrdiff_t>(s * K),
                                           cnt.begin() + static_cast<std::ptrdiff_t>((s + 1) * K));
                err += total[s] - top[s];
                if (total[s] < params.min_bucket) ++violations;
            }
            auto move_left = [&](int row) {
                const auto sr = static_cast<std::size_t>(
                    slot[static_cast<std::size_t>(leaf_r[static_cast<std::size_t>(row)])]);
                const auto sl = static_cast<std::size_t>(
                    slot[static_cast<std::size_t>(leaf_l[static_cast<std::size_t>(row)])]);
                const auto y = static_cast<std::size_t>(y_ids[static_cast<std::size_t>(row)]);
                err -= (total[sr] - top[sr]) + (total[sl] - top[sl]);
                if (total[sr] == params.min_bucket) ++violations;
                --total[sr];
                if (--cnt[sr * K + y] + 1 == top[sr])
                    top[sr] = *std::max_element(
                        cnt.begin() + static_cast<std::ptrdiff_t>(sr * K),
                        cnt.begin() + static_cast<std::ptrdiff_t>((sr + 1) * K));
                if (total[sl] == params.min_bucket - 1) --violations;
                ++total[sl];
                top[sl] = std::max(top[sl], ++cnt[sl * K + y]);
                err += (total[sr] - top[sr]) + (total[sl] - top[sl]);
            };
            const auto& ord = orders[static_cast<std::size_t>(j)];
            double prev_value = 0.0;
            bool have_prev = false;
            for (int row : ord) {
                if (!in_node[static_cast<std::size_t>(row)]) continue;
                const double v = X(row, j);
                if (have_prev && v > prev_value && violations == 0) {
                    const double thr = 0.5 * (prev_value + v);
                    if (!found || err < best_err ||
                        (err == best_err && (static_cast<int>(j) < best_feature ||
                                             (static_cast<int>(j) == best_feature &&
                                              thr < best_thr)))) {
                        found = true;
                        best_err = err;
                        best_feature = static_cast<int>(j);
                        best_thr = thr;
                    }
                }
                move_left(row);
                prev_value = v;
                have_prev = true;
            }
        }
        if (!found) return {};
        move.feature = best_feature;
        move.threshold = best_thr;
        move.delta = static_cast<double>(best_err - err_current);
        return move;
    }

    Move best_delete(int idx, const std::vector<bool>& in_node) {
        std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t i = 0; i < in_node.size(); ++i)
            if (in_node[i]) ++counts[static_cast<std::size_t>(y_ids[i])];
        int branches = 0;
        long err_subtree = 0;
        subtree_stats(idx, &branches, &err_subtree);
        Move move;
        move.kind = Move::Delete;
        move.node = idx;
        move.delta = static_cast<double>(leaf_errors(counts) - err_subtree) -
                     params.complexity_weight * branches;
        return move;
    }

    Move best_split_leaf(int idx, const std::vector<bool>& in_node) {
        if (depth_of(idx) >= params.max_depth) return {};
        const SplitCandidate split = best_split(X, y_ids, in_node, orders, num_classes,
                                                params.min_bucket, params.impurity);
        if (!split.found) return {};
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        Move move;
        move.kind = Move::SplitLeaf;
        move.node = idx;
        move.feature = split.feature;
        move.threshold = split.threshold;
        move.delta = static_cast<double>(split.errors - leaf_errors(node.counts)) +
                     params.complexity_weight;
        return move;
    }

    void apply(const Move& move) {
        auto& node = tree.nodes[static_cast<std::size_t>(move.node)];
        if (move.kind == Move::Replace) {
            node.feature = move.feature;
            node.threshold = move.threshold;
        } else if (move.kind == Move::Delete) {
            node.is_leaf = true;
            node.feature = -1;
            node.left = node.right = -1;
        } else if (move.kind == Move::SplitLeaf) {
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.back().counts.assign(static_cast<std::size_t>(num_classes), 0);
            const int r = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.back().counts.assign(static_cast<std::size_t>(num_classes), 0);
            auto& nd = tree.nodes[static_cast<std::size_t>(move.node)];
            nd.is_leaf = false;
            nd.feature = move.feature;
            nd.threshold = move.threshold;
            nd.left = l;
            nd.right = r;
        }
        tree = compact(tree);
        refresh();
    }

    void run(Rng& rng) {
        refresh();
        for (;;) {
            bool improved = false;
            std::vector<int> visit(tree.nodes.size());
            std::iota(visit.begin(), visit.end(), 0);
            std::shuffle(visit.begin(), visit.end(), rng);
            for (int raw : visit) {
                if (raw >= static_cast<int>(tree.nodes.size())) continue;
                const int idx = raw;
                const std::vector<bool> in_node = members_of(idx);
                const bool is_leaf = tree.nodes[static_cast<std::size_t>(idx)].is_leaf;
                Move best;
                auto consider = [&](const Move& m) {
                    if (m.kind == Move::None) return;
                    if (best.kind == Move::None || m.delta < best.delta) best = m;
                };
                if (is_leaf) {
                    consider(best_split_leaf(idx, in_node));
                } else {
                    consider(best_replace(idx, in_node));
                    consider(best_delete(idx, in_node));
                }
                if (best.kind != Move::None && best.delta < -1e-9) {
                    const double g_before = g;
                    const DecisionTree backup = tree;
                    apply(best);
                    if (g < g_before - 1e-9) {
                        improved = true;
                        break;  // tree indices changed; restart the visit order
                    }
                    tree = backup;
                    g = g_before;  // rejected; keep scanning the other nodes
                }
            }
            if (!improved) break;
        }
    }
};

DecisionTree random_feasible_tree(const Eigen::MatrixXd& X, const std::vector<int>& y_ids,
                                  int num_classes, const TreeParams& params, Rng& rng) {
    DecisionTree tree;
    tree.num_classes = num_classes;
    struct Builder {
        const Eigen::MatrixXd& X;
        const TreeParams& params;
        Rng& rng;
        DecisionTree& tree;
        int build(const std::vector<int>& rows, int depth) {
            const int idx = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const bool may_split = depth < params.max_depth &&
                                   static_cast<int>(rows.size()) >= 2 * params.min_bucket;
            if (!may_split || unif(rng) < 0.3) return idx;
            // try a few random (feature, threshold) picks honoring min_bucket
            for (int attempt = 0; attempt < 20; ++attempt) {
                std::uniform_int_distribution<int> feat_dist(0, static_cast<int>(X.cols()) - 1);
                const int j = feat_dist(rng);
                std::uniform_int_distribution<std::size_t> row_dist(0, rows.size() - 1);
                const double a = X(rows[row_dist(rng)], j);
                const double b = X(rows[row_dist(rng)], j);
                if (a == b) continue;
                const double thr = 0.5 * (a + b);
                std::vector<int> left, right;
                for (int row : rows)
                    (X(row, j) < thr ? left : right).push_back(row);
                if (static_cast<int>(left.size()) < params.min_bucket ||
                    static_cast<int>(right.size()) < params.min_bucket)
                    continue;
                const int l = build(left, depth + 1);
                const int r = build(right, depth + 1);
                auto& node = tree.nodes[static_cast<std::size_t>(idx)];
                node.is_leaf = false;
                node.feature = j;
                node.threshold = thr;
                node.left = l;
                node.right = r;
                return idx;
            }
            return idx;
        }
    } builder{X, params, rng, tree};
    std::vector<int> all(static_cast<std::size_t>(X.rows()));
    std::iota(all.begin(), all.end(), 0);
    builder.build(all, 0);
    for (auto& node : tree.nodes) node.counts.assign(static_cast<std::size_t>(num_classes), 0);
    (void)y_ids;
    return tree;
}

}  // namespace

DecisionTree fit_oct_local_search(const Dataset& d, const TreeParams& params, int restarts,
                                  std::uint64_t seed) {
    int num_classes = 2;
    const std::vector<int> y_ids = to_class_ids(d, &num_classes);
    const auto orders = column_orders(d.X);
    restarts = std::max(restarts, 1);

    DecisionTree best;
    double best_g = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        LocalSearch ls{d.X, y_ids, orders, num_classes, params, {}, 0.0};
        if (r == 0) {
            ls.tree = fit_cart(d, params);
        } else {
            ls.tree = random_feasible_tree(d.X, y_ids, num_classes, params, rng);
        }
        ls.run(rng);
        if (ls.g < best_g) {
            best_g = ls.g;
            best = std::move(ls.tree);
        }
    }
    return best;
}

std::pair<TreeParams, DecisionTree> cv_tree(const Dataset& d, const SplitIndices& split,
                                            const std::vector<int>& depth_grid,
                                            const std::vector<int>& nmin_grid,
                                            const std::vector<double>& lambda_grid,
                                            TreeMethod method, int restarts,
                                            std::uint64_t seed) {
    if (depth_grid.empty() || nmin_grid.empty() || lambda_grid.empty())
        throw InvalidGrid("cv_tree requires nonempty grids");
    const Dataset train = d.select_rows(split.train);
    const Dataset valid = d.select_rows(split.validation);
    const std::vector<int> valid_ids = to_class_ids(valid, nullptr);

    TreeParams best_params;
    long best_score = std::numeric_limits<long>::max();
    std::uint64_t point = 0;
    for (int depth : depth_grid) {
        for (int nmin : nmin_grid) {
            for (double lambda : lambda_grid) {
                TreeParams p;
                p.max_depth = depth;
                p.min_bucket = nmin;
                p.complexity_weight = lambda;
                ++point;
                const DecisionTree t =
                    method == TreeMethod::Cart
                        ? fit_cart(train, p)
                        : fit_oct_local_search(train, p, restarts, derive_seed(seed, point));
                const long score = misclassification_count(t, valid.X, valid_ids);
                if (score < best_score) {
                    best_score = score;
                    best_params = p;
                }
            }
        }
    }
    DecisionTree refit = method == TreeMethod::Cart
                             ? fit_cart(d, best_params)
                             : fit_oct_local_search(d, best_params, restarts,
                                                    derive_seed(seed, 0xfe11ull));
    return {best_params, std::move(refit)};
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

namespace {

void print_rec(const DecisionTree& t, int idx, int depth, std::string* out) {
    const auto& node = t.nodes[static_cast<std::size_t>(idx)];
    out->append(static_cast<std::size_t>(2 * depth), ' ');
    char buf[64];
    if (node.is_leaf) {
        out->append("leaf ");
        out->append(std::to_string(node.label));
        for (long c : node.counts) {
            out->push_back(' ');
            out->append(std::to_string(c));
        }
    } else {
        std::snprintf(buf, sizeof(buf), "branch %d %.17g", node.feature, node.threshold);
        out->append(buf);
    }
    out->push_back('\n');
    if (!node.is_leaf) {
        print_rec(t, node.left, depth + 1, out);
        print_rec(t, node.right, depth + 1, out);
    }
}

}  // namespace

std::string print_tree(const DecisionTree& t) {
    std::string out;
    if (!t.empty()) print_rec(t, 0, 0, &out);
    return out;
}

DecisionTree parse_tree(const std::string& text) {
    struct Line {
        int depth;
        std::string body;
    };
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        if (raw.empty()) continue;
        std::size_t spaces = 0;
        while (spaces < raw.size() && raw[spaces] == ' ') ++spaces;
        lines.push_back({static_cast<int>(spaces / 2), raw.substr(spaces)});
    }
    if (lines.empty()) throw ParseError(0, 0, "empty tree text");

    DecisionTree tree;
    std::size_t cursor = 0;
    int max_class = 1;
    struct Parser {
        std::vector<Line>& lines;
        std::size_t& cursor;
        DecisionTree& tree;
        int& max_class;
        int parse(int depth) {
            if (cursor >= lines.size() || lines[cursor].depth != depth)
                throw ParseError(static_cast<int>(cursor), 0, "malformed tree indentation");
            std::istringstream ls(lines[cursor].body);
            ++cursor;
            std::string kind;
            ls >> kind;
            const int idx = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            if (kind == "leaf") {
                auto& node = tree.nodes[static_cast<std::size_t>(idx)];
                ls >> node.label;
                long c;
                while (ls >> c) node.counts.push_back(c);
                max_class = std::max(max_class, node.label);
                max_class = std::max(max_class, static_cast<int>(node.counts.size()) - 1);
            } else if (kind == "branch") {
                int feature;
                double threshold;
                ls >> feature >> threshold;
                if (!ls) throw ParseError(static_cast<int>(cursor), 0, "bad branch line");
                const int l = parse(depth + 1);
                const int r = parse(depth + 1);
                auto& node = tree.nodes[static_cast<std::size_t>(idx)];
                node.is_leaf = false;
                node.feature = feature;
                node.threshold = threshold;
                node.left = l;
                node.right = r;
            } else {
                throw ParseError(static_cast<int>(cursor), 0, "unknown node kind");
            }
            return idx;
        }
    } parser{lines, cursor, tree, max_class};
    parser.parse(0);
    if (cursor != lines.size()) throw ParseError(static_cast<int>(cursor), 0, "trailing lines");
    tree.num_classes = std::max(2, max_class + 1);
    return tree;
}

}  // namespace bb
