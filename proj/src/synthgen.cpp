#include "bb/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bb/errors.hpp"
#include "bb/rng.hpp"

namespace bb {

Eigen::MatrixXd gen_design(int n, int p, double rho, std::uint64_t seed) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("need 0 <= rho < 1");
    Eigen::MatrixXd X(n, p);
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double carry = std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
        double prev = gauss(rng);
        X(i, 0) = prev;
        for (int j = 1; j < p; ++j) {
            prev = rho * prev + carry * gauss(rng);
            X(i, j) = prev;
        }
    }
    return X;
}

namespace {

LinearGroundTruth draw_linear_truth(int p, int k, double rho, double snr, Rng& rng) {
    if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");
    if (!(snr > 0.0)) throw std::invalid_argument("need snr > 0");
    std::vector<int> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);
    LinearGroundTruth truth;
    truth.support.resize(static_cast<std::size_t>(k));
    std::sample(all.begin(), all.end(), truth.support.begin(), k, rng);
    truth.w_true = Eigen::VectorXd::Zero(p);
    std::bernoulli_distribution coin(0.5);
    for (int j : truth.support) truth.w_true[j] = coin(rng) ? 1.0 : -1.0;
    truth.snr = snr;
    truth.rho = rho;
    return truth;
}

/// Draws raw N(0,1) noise and rescales it so ||X w|| / ||eps|| = sqrt(snr).
Eigen::VectorXd scaled_noise(const Eigen::VectorXd& signal, double snr, Rng& rng,
                             double* sigma_out) {
    const double signal_norm = signal.norm();
    if (signal_norm == 0.0) throw DegenerateSignal();
    Eigen::VectorXd eps(signal.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = gauss(rng);
    const double raw_norm = eps.norm();
    const double scale = raw_norm > 0.0 ? signal_norm / (std::sqrt(snr) * raw_norm) : 0.0;
    if (sigma_out) *sigma_out = scale;
    return scale * eps;
}

}  // namespace

std::pair<Dataset, LinearGroundTruth> gen_linear(int n, int p, int k, double rho, double snr,
                                                 std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x11));
    LinearGroundTruth truth = draw_linear_truth(p, k, rho, snr, rng);
    Dataset d = gen_linear_from_truth(n, p, truth, seed);
    // carry back the realized noise scale of the generated training set
    const Eigen::VectorXd signal = d.X * truth.w_true;
    truth.sigma = (d.y - signal).norm() /
                  std::sqrt(static_cast<double>(std::max(n, 1)));
    return {std::move(d), std::move(truth)};
}

Dataset gen_linear_from_truth(int n, int p, const LinearGroundTruth& truth,
                              std::uint64_t seed) {
    if (truth.w_true.size() != p) throw std::invalid_argument("truth dimension mismatch");
    Dataset d;
    d.task = Task::Regression;
    d.X = gen_design(n, p, truth.rho, derive_seed(seed, 0x22));
    Rng rng(derive_seed(seed, 0x33));
    const Eigen::VectorXd signal = d.X * truth.w_true;
    d.y = signal + scaled_noise(signal, truth.snr, rng, nullptr);
    return d;
}

std::pair<Dataset, LinearGroundTruth> gen_logistic(int n, int p, int k, double rho, double snr,
                                                   std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x11));
    LinearGroundTruth truth = draw_linear_truth(p, k, rho, snr, rng);
    Dataset d = gen_logistic_from_truth(n, p, truth, seed);
    return {std::move(d), std::move(truth)};
}

Dataset gen_logistic_from_truth(int n, int p, const LinearGroundTruth& truth,
                                std::uint64_t seed) {
    if (truth.w_true.size() != p) throw std::invalid_argument("truth dimension mismatch");
    Dataset d;
    d.task = Task::BinaryClassification;
    d.X = gen_design(n, p, truth.rho, derive_seed(seed, 0x22));
    Rng rng(derive_seed(seed, 0x33));
    const Eigen::VectorXd signal = d.X * truth.w_true;
    const Eigen::VectorXd arg = signal + scaled_noise(signal, truth.snr, rng, nullptr);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) d.y[i] = arg[i] < 0.0 ? -1.0 : 1.0;  // sign(0) -> +1
    return d;
}

namespace {

double leaf_label_value(int class_id, int num_classes) {
    if (num_classes == 2) return class_id == 0 ? -1.0 : 1.0;
    return static_cast<double>(class_id + 1);
}

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const TreeGenConfig& cfg;
    Rng& rng;
    DecisionTree tree;
    std::vector<int> slot_features;  // feature per branch node, pre-assigned
    std::size_t next_slot = 0;
    Eigen::VectorXd col_min, col_max;

    int build(int depth, std::vector<std::pair<double, double>>& bounds,
              const std::vector<int>& relevant) {
        DecisionTree::Node node;
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);
        if (depth == cfg.depth) {
            tree.nodes[static_cast<std::size_t>(id)].is_leaf = true;
            return id;
        }
        const int feat = slot_features[next_slot++];
        // position of feat inside the relevant list, for the bounds table
        const auto rpos = static_cast<std::size_t>(
            std::lower_bound(relevant.begin(), relevant.end(), feat) - relevant.begin());
        auto [lo, hi] = bounds[rpos];
        const double xmin = col_min[feat], xmax = col_max[feat];
        double f = cfg.balance;
        double a = 0.0, b = 0.0;
        for (;;) {
            const double shrink = (xmax - xmin) * f / 2.0;
            a = std::max(lo, xmin + shrink);
            b = std::min(hi, xmax - shrink);
            if (a < b) break;
            if (f < 1e-9) { a = lo; b = hi; break; }
            f /= 2.0;  // empty f-shrunk interval: relax balance for this node
        }
        std::uniform_real_distribution<double> unif(a, b);
        double thr = unif(rng);
        while (!(thr > lo && thr < hi)) thr = unif(rng);
        auto& nd = tree.nodes[static_cast<std::size_t>(id)];
        nd.is_leaf = false;
        nd.feature = feat;
        nd.threshold = thr;
        bounds[rpos] = {lo, thr};
        const int left = build(depth + 1, bounds, relevant);
        bounds[rpos] = {thr, hi};
        const int right = build(depth + 1, bounds, relevant);
        bounds[rpos] = {lo, hi};
        tree.nodes[static_cast<std::size_t>(id)].left = left;
        tree.nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }
};

void assign_sibling_labels(DecisionTree& tree, int node, int num_classes, Rng& rng) {
    auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf) return;
    auto& l = tree.nodes[static_cast<std::size_t>(nd.left)];
    auto& r = tree.nodes[static_cast<std::size_t>(nd.right)];
    if (l.is_leaf && r.is_leaf) {
        std::uniform_int_distribution<int> first(0, num_classes - 1);
        const int c1 = first(rng);
        std::uniform_int_distribution<int> second(0, num_classes - 2);
        int c2 = second(rng);
        if (c2 >= c1) ++c2;
        l.label = c1;
        r.label = c2;
        return;
    }
    assign_sibling_labels(tree, nd.left, num_classes, rng);
    assign_sibling_labels(tree, nd.right, num_classes, rng);
}

}  // namespace

std::pair<Dataset, TreeGroundTruth> gen_tree_data(int n, int p, const TreeGenConfig& cfg,
                                                  double rho, std::uint64_t seed) {
    if (cfg.depth < 1 || cfg.r < 1 || cfg.num_classes < 2)
        throw std::invalid_argument("invalid tree generator config");
    const long slots = (1L << cfg.depth) - 1;
    if (static_cast<long>(cfg.k) * cfg.r > slots)
        throw InfeasibleConfig("k*r exceeds the number of branch nodes 2^D - 1");
    if (p < cfg.k) throw std::invalid_argument("need p >= k");

    Rng rng(derive_seed(seed, 0x44));
    TreeGroundTruth truth;
    std::vector<int> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);
    truth.relevant.resize(static_cast<std::size_t>(cfg.k));
    std::sample(all.begin(), all.end(), truth.relevant.begin(), cfg.k, rng);

    Eigen::MatrixXd X = gen_design(n, p, rho, derive_seed(seed, 0x55));

    // Round-robin the relevant features over branch slots, then shuffle, so
    // each relevant feature lands in at least floor(slots/k) >= r nodes.
    std::vector<int> slot_features;
    slot_features.reserve(static_cast<std::size_t>(slots));
    for (long s = 0; s < slots; ++s)
        slot_features.push_back(truth.relevant[static_cast<std::size_t>(s % cfg.k)]);
    std::shuffle(slot_features.begin(), slot_features.end(), rng);

    TreeBuilder builder{X, cfg, rng, {}, std::move(slot_features), 0,
                        X.colwise().minCoeff(), X.colwise().maxCoeff()};
    builder.tree.num_classes = cfg.num_classes;
    std::vector<std::pair<double, double>> bounds;
    bounds.reserve(truth.relevant.size());
    for (int j : truth.relevant) bounds.emplace_back(builder.col_min[j], builder.col_max[j]);
    builder.build(0, bounds, truth.relevant);
    assign_sibling_labels(builder.tree, 0, cfg.num_classes, rng);
    truth.tree = std::move(builder.tree);

    Dataset d;
    d.task = cfg.num_classes == 2 ? Task::BinaryClassification : Task::MultiClassification;
    d.X = std::move(X);
    d.y.resize(n);
    for (auto& nd : truth.tree.nodes)
        if (nd.is_leaf) nd.counts.assign(static_cast<std::size_t>(cfg.num_classes), 0);
    for (int i = 0; i < n; ++i) {
        int cur = 0;
        while (!truth.tree.nodes[static_cast<std::size_t>(cur)].is_leaf) {
            const auto& nd = truth.tree.nodes[static_cast<std::size_t>(cur)];
            cur = d.X(i, nd.feature) < nd.threshold ? nd.left : nd.right;
        }
        auto& leaf = truth.tree.nodes[static_cast<std::size_t>(cur)];
        leaf.counts[static_cast<std::size_t>(leaf.label)] += 1;
        d.y[i] = leaf_label_value(leaf.label, cfg.num_classes);
    }
    return {std::move(d), std::move(truth)};
}

Dataset gen_tree_data_from_truth(int n, int p, const TreeGroundTruth& truth, double rho,
                                 std::uint64_t seed) {
    Dataset d;
    d.task = truth.tree.num_classes == 2 ? Task::BinaryClassification
                                         : Task::MultiClassification;
    d.X = gen_design(n, p, rho, derive_seed(seed, 0x66));
    std::vector<int> ids = predict(truth.tree, d.X);
    d.y.resize(n);
    for (int i = 0; i < n; ++i)
        d.y[i] = leaf_label_value(ids[static_cast<std::size_t>(i)], truth.tree.num_classes);
    return d;
}

}  // namespace bb
