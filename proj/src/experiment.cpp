#include "bb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "bb/errors.hpp"
#include "bb/metrics.hpp"
#include "bb/rng.hpp"
#include "bb/screening.hpp"
#include "bb/sparse_linear.hpp"
#include "bb/synthgen.hpp"

namespace bb {

namespace {

const std::set<std::string> kKnownKeys = {
    "kind",        "method",     "name",       "n",          "p",
    "k",           "rho",        "snr",        "depth",      "r",
    "balance",     "n_test",     "csv_path",   "response",   "task",
    "alpha",       "beta",       "subproblems", "b_max",     "k_max",
    "sampling",    "early_stop", "row_fraction", "k0",       "k_step",
    "rel_tol",     "gamma",      "mus",        "grid_len",   "depth_grid",
    "nmin_grid",   "lambda_grid", "restarts",  "seeds",      "ratio",
    "output",      "workers"};

ExperimentKind parse_kind(const std::string& s) {
    if (s == "synth_linear") return ExperimentKind::SynthLinear;
    if (s == "synth_logistic") return ExperimentKind::SynthLogistic;
    if (s == "synth_tree") return ExperimentKind::SynthTree;
    if (s == "real_csv") return ExperimentKind::RealCsv;
    throw ConfigError("unknown experiment kind: " + s);
}

Method parse_method(const std::string& s) {
    if (s == "backbone") return Method::Backbone;
    if (s == "sis_enet") return Method::SisEnet;
    if (s == "exact_sr") return Method::ExactSR;
    if (s == "cart") return Method::Cart;
    if (s == "oct_local_search") return Method::OctLocalSearch;
    if (s == "oracle") return Method::Oracle;
    throw ConfigError("unknown method: " + s);
}

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::SynthLinear: return "synth_linear";
        case ExperimentKind::SynthLogistic: return "synth_logistic";
        case ExperimentKind::SynthTree: return "synth_tree";
        case ExperimentKind::RealCsv: return "real_csv";
    }
    return "?";
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Backbone: return "backbone";
        case Method::SisEnet: return "sis_enet";
        case Method::ExactSR: return "exact_sr";
        case Method::Cart: return "cart";
        case Method::OctLocalSearch: return "oct_local_search";
        case Method::Oracle: return "oracle";
    }
    return "?";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
    const auto unknown = kv.unknown_keys(kKnownKeys);
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError("unknown config keys: " + list);
    }
    ExperimentConfig cfg;
    cfg.kind = parse_kind(kv.get_string("kind", "synth_linear"));
    cfg.method = parse_method(kv.get_string("method", "backbone"));
    cfg.n = kv.get_int("n", cfg.n);
    cfg.p = kv.get_int("p", cfg.p);
    cfg.k = kv.get_int("k", cfg.k);
    cfg.rho = kv.get_double("rho", cfg.rho);
    cfg.snr = kv.get_double("snr", cfg.snr);
    cfg.tree_depth = kv.get_int("depth", cfg.tree_depth);
    cfg.tree_r = kv.get_int("r", cfg.tree_r);
    cfg.tree_balance = kv.get_double("balance", cfg.tree_balance);
    cfg.n_test = kv.get_int("n_test", cfg.n_test);
    cfg.csv_path = kv.get_string("csv_path", cfg.csv_path);
    cfg.response_column = kv.get_string("response", cfg.response_column);
    const std::string task = kv.get_string("task", "regression");
    if (task == "regression")
        cfg.csv_task = Task::Regression;
    else if (task == "binary")
        cfg.csv_task = Task::BinaryClassification;
    else if (task == "multi")
        cfg.csv_task = Task::MultiClassification;
    else
        throw ConfigError("unknown task: " + task);
    cfg.alpha = kv.get_double("alpha", cfg.alpha);
    cfg.beta = kv.get_double("beta", cfg.beta);
    cfg.num_subproblems = kv.get_int("subproblems", cfg.num_subproblems);
    cfg.backbone_max = kv.get_int("b_max", cfg.backbone_max);
    cfg.k_max = kv.get_int("k_max", cfg.k_max);
    const std::string sampling = kv.get_string("sampling", "screening");
    if (sampling == "screening")
        cfg.sampling_mode = SamplingMode::ScreeningSample;
    else if (sampling == "random")
        cfg.sampling_mode = SamplingMode::RandomSample;
    else
        throw ConfigError("unknown sampling mode: " + sampling);
    cfg.early_stop = kv.get_bool("early_stop", cfg.early_stop);
    cfg.row_fraction = kv.get_double("row_fraction", cfg.row_fraction);
    cfg.k0 = kv.get_int("k0", cfg.k0);
    cfg.k_step = kv.get_int("k_step", cfg.k_step);
    cfg.rel_tol = kv.get_double("rel_tol", cfg.rel_tol);
    cfg.gamma = kv.get_double("gamma", cfg.gamma);
    cfg.mus = kv.get_doubles("mus", cfg.mus);
    cfg.grid_len = kv.get_int("grid_len", cfg.grid_len);
    cfg.depth_grid = kv.get_ints("depth_grid", cfg.depth_grid);
    cfg.nmin_grid = kv.get_ints("nmin_grid", cfg.nmin_grid);
    cfg.lambda_grid = kv.get_doubles("lambda_grid", cfg.lambda_grid);
    cfg.restarts = kv.get_int("restarts", cfg.restarts);
    cfg.seeds = kv.get_u64s("seeds", cfg.seeds);
    if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
    cfg.holdout_ratio = kv.get_double("ratio", cfg.holdout_ratio);
    cfg.output_path = kv.get_string("output", cfg.output_path);
    cfg.workers = kv.get_int("workers", cfg.workers);
    cfg.name = kv.get_string("name", kind_name(cfg.kind) + "-" + method_name(cfg.method));
    cfg.config_hash = kv.hash();
    return cfg;
}

int ExperimentConfig::effective_k_max() const {
    if (k_max > 0) return k_max;
    if (kind == ExperimentKind::SynthTree) return (1 << tree_depth) - 1;
    return std::max(k, 1);
}

namespace {

using MetricList = std::vector<std::pair<std::string, double>>;

struct SeedData {
    Dataset train_std;  // standardized
    StandardizationStats stats;
    Dataset test_raw;            // raw test features/labels (empty for real data)
    bool has_test = false;
    std::vector<int> truth;      // planted support / relevant set (may be empty)
    bool has_truth = false;
};

Eigen::MatrixXd standardize_with(const Eigen::MatrixXd& X, const StandardizationStats& stats) {
    Eigen::MatrixXd out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        out.col(j) = (X.col(j).array() - stats.means[j]) / stats.scales[j];
    return out;
}

SeedData prepare_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedData sd;
    if (cfg.kind == ExperimentKind::SynthLinear) {
        auto [d, truth] = gen_linear(cfg.n, cfg.p, cfg.k, cfg.rho, cfg.snr,
                                     derive_seed(seed, 0xD1));
        auto [std_d, stats] = standardize(d);
        sd.train_std = std::move(std_d);
        sd.stats = stats;
        sd.test_raw = gen_linear_from_truth(cfg.n_test, cfg.p, truth, derive_seed(seed, 0xD2));
        sd.has_test = true;
        sd.truth = truth.support;
        sd.has_truth = true;
    } else if (cfg.kind == ExperimentKind::SynthLogistic) {
        auto [d, truth] = gen_logistic(cfg.n, cfg.p, cfg.k, cfg.rho, cfg.snr,
                                       derive_seed(seed, 0xD1));
        auto [std_d, stats] = standardize(d);
        sd.train_std = std::move(std_d);
        sd.stats = stats;
        sd.test_raw =
            gen_logistic_from_truth(cfg.n_test, cfg.p, truth, derive_seed(seed, 0xD2));
        sd.has_test = true;
        sd.truth = truth.support;
        sd.has_truth = true;
    } else if (cfg.kind == ExperimentKind::SynthTree) {
        TreeGenConfig tc;
        tc.depth = cfg.tree_depth;
        tc.k = cfg.k;
        tc.r = cfg.tree_r;
        tc.balance = cfg.tree_balance;
        auto [d, truth] = gen_tree_data(cfg.n, cfg.p, tc, cfg.rho, derive_seed(seed, 0xD1));
        auto [std_d, stats] = standardize(d);
        sd.train_std = std::move(std_d);
        sd.stats = stats;
        sd.test_raw =
            gen_tree_data_from_truth(cfg.n_test, cfg.p, truth, cfg.rho, derive_seed(seed, 0xD2));
        sd.has_test = true;
        sd.truth = truth.relevant;
        sd.has_truth = true;
    } else {
        Dataset d = cfg.response_column.empty()
                        ? load_csv(cfg.csv_path, -1, cfg.csv_task)
                        : load_csv(cfg.csv_path, cfg.response_column, cfg.csv_task);
        auto [std_d, stats] = standardize(d);
        sd.train_std = std::move(std_d);
        sd.stats = stats;
    }
    return sd;
}

LossKind loss_for(const Dataset& d) {
    return d.task == Task::Regression ? LossKind::Squared : LossKind::Logistic;
}

double pick_alpha(const ExperimentConfig& cfg, const Dataset& d) {
    if (cfg.alpha > 0.0) return std::min(cfg.alpha, 1.0);
    return default_alpha(d.n(), d.p());
}

double pick_gamma(const ExperimentConfig& cfg, Eigen::Index n) {
    return cfg.gamma > 0.0 ? cfg.gamma : 1.0 / std::sqrt(static_cast<double>(n));
}

/// Test-set regression/classification quality of a linear solution fitted on
/// standardized training data.
void linear_test_metrics(const ExperimentConfig& cfg, const SeedData& sd,
                         const RegressorSolution& sol, MetricList* out) {
    if (!sd.has_test) return;
    const Eigen::MatrixXd Xt = standardize_with(sd.test_raw.X, sd.stats);
    Eigen::VectorXd pred =
        Xt * sol.w + Eigen::VectorXd::Constant(Xt.rows(), sol.intercept);
    if (cfg.kind == ExperimentKind::SynthLinear) {
        const Eigen::VectorXd raw_pred =
            pred * sd.stats.response_scale +
            Eigen::VectorXd::Constant(pred.size(), sd.stats.response_mean);
        out->emplace_back("r2", r2(sd.test_raw.y, raw_pred));
    } else {
        out->emplace_back("auc", auc(sd.test_raw.y, pred));
    }
}

void support_rows(const std::vector<int>& selected, const SeedData& sd, MetricList* out) {
    out->emplace_back("selected_size", static_cast<double>(selected.size()));
    if (!sd.has_truth) return;
    const SupportMetrics sm = support_metrics(selected, sd.truth);
    out->emplace_back("sr_acc", sm.sr_acc);
    out->emplace_back("sr_fa", sm.sr_fa);
}

void tree_test_metrics(const SeedData& sd, const DecisionTree& tree, MetricList* out) {
    const TreeStructureMetrics ts = tree_structure_metrics(tree, sd.truth);
    out->emplace_back("fraction_relevant", ts.fraction_relevant);
    out->emplace_back("tree_depth", static_cast<double>(ts.depth));
    if (!sd.has_test) return;
    const Eigen::MatrixXd Xt = standardize_with(sd.test_raw.X, sd.stats);
    const Eigen::VectorXd scores = predict_scores(tree, Xt, 1);
    out->emplace_back("auc", auc(sd.test_raw.y, scores));
    std::vector<int> test_ids(static_cast<std::size_t>(Xt.rows()));
    for (Eigen::Index i = 0; i < Xt.rows(); ++i)
        test_ids[static_cast<std::size_t>(i)] = sd.test_raw.y[i] > 0 ? 1 : 0;
    out->emplace_back("test_accuracy",
                      1.0 - static_cast<double>(misclassification_count(tree, Xt, test_ids)) /
                                static_cast<double>(Xt.rows()));
}

TreeParams subproblem_tree_params(const ExperimentConfig& cfg) {
    TreeParams tp;
    tp.max_depth = cfg.tree_depth;
    tp.min_bucket = cfg.nmin_grid.empty() ? 1 : cfg.nmin_grid.front();
    tp.complexity_weight = cfg.lambda_grid.empty() ? 0.0 : cfg.lambda_grid.front();
    return tp;
}

MetricList run_backbone_method(const ExperimentConfig& cfg, const SeedData& sd,
                               std::uint64_t seed) {
    MetricList out;
    const Dataset& d = sd.train_std;
    const bool tree_task = cfg.kind == ExperimentKind::SynthTree;

    BackboneConfig bc;
    bc.num_subproblems = cfg.num_subproblems;
    bc.alpha = pick_alpha(cfg, d);
    bc.beta = cfg.beta;
    bc.backbone_max = cfg.backbone_max;
    bc.k_max = cfg.effective_k_max();
    bc.sampling_mode = cfg.sampling_mode;
    bc.screen_loss = loss_for(d);
    bc.seed = derive_seed(seed, 0xBB);
    bc.early_stop = cfg.early_stop;
    bc.row_fraction = cfg.row_fraction;

    SubproblemFitter fit_sub;
    RelevantExtractor extract;
    FinalFitter fit_final;
    if (tree_task) {
        const TreeParams tp = subproblem_tree_params(cfg);
        fit_sub = [tp](const Dataset& sub, std::uint64_t) -> std::any {
            return fit_cart(sub, tp);
        };
        extract = [](const std::any& model) {
            return relevant_features(std::any_cast<const DecisionTree&>(model));
        };
        const int restarts = cfg.restarts;
        fit_final = [tp, restarts](const Dataset& reduced, std::uint64_t s) -> FinalModel {
            return fit_oct_local_search(reduced, tp, restarts, s);
        };
    } else {
        const LossKind loss = loss_for(d);
        const double ratio = cfg.holdout_ratio;
        const int k0 = cfg.k0, k_step = cfg.k_step, k_cap = cfg.effective_k_max();
        const double rel_tol = cfg.rel_tol;
        const double gamma_cfg = cfg.gamma;
        fit_sub = [=](const Dataset& sub, std::uint64_t s) -> std::any {
            const SplitIndices split = holdout_split(sub, ratio, derive_seed(s, 0x51));
            const double gamma = gamma_cfg > 0.0
                                     ? gamma_cfg
                                     : 1.0 / std::sqrt(static_cast<double>(sub.n()));
            const int start = std::min(k0, k_cap);
            return cv_incremental_k(sub, split, start, k_step, SparseSolver::Subgradient,
                                    gamma, loss, rel_tol, k_cap);
        };
        extract = [](const std::any& model) {
            return std::any_cast<const IncrementalKResult&>(model).solution.support;
        };
        fit_final = [=](const Dataset& reduced, std::uint64_t s) -> FinalModel {
            const SplitIndices split = holdout_split(reduced, ratio, derive_seed(s, 0x52));
            const double gamma = gamma_cfg > 0.0
                                     ? gamma_cfg
                                     : 1.0 / std::sqrt(static_cast<double>(reduced.n()));
            const int start = std::min(k0, k_cap);
            return cv_incremental_k(reduced, split, start, k_step,
                                    SparseSolver::CuttingPlanes, gamma, loss, rel_tol, k_cap)
                .solution;
        };
    }

    const BackboneResult result = run_backbone(d, bc, fit_sub, extract, fit_final);

    out.emplace_back("backbone_size", static_cast<double>(result.backbone.size()));
    out.emplace_back("iterations", static_cast<double>(result.iterations_used));
    out.emplace_back("h_bound", static_cast<double>(result.h_bound));
    if (sd.has_truth) {
        out.emplace_back("backbone_sr_acc",
                         support_metrics(result.backbone, sd.truth).sr_acc);
    }
    if (std::holds_alternative<RegressorSolution>(result.final_model)) {
        RegressorSolution sol = std::get<RegressorSolution>(result.final_model);
        // the final model's coefficients live on backbone columns; map back
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d.p());
        std::vector<int> support;
        for (std::size_t j = 0; j < result.backbone.size(); ++j) {
            const int global = result.backbone[j];
            w[global] = sol.w[static_cast<Eigen::Index>(j)];
            if (sol.w[static_cast<Eigen::Index>(j)] != 0.0) support.push_back(global);
        }
        support_rows(support, sd, &out);
        out.emplace_back("gap", sol.gap);
        RegressorSolution global_sol = sol;
        global_sol.w = std::move(w);
        linear_test_metrics(cfg, sd, global_sol, &out);
    } else if (std::holds_alternative<DecisionTree>(result.final_model)) {
        DecisionTree tree = std::get<DecisionTree>(result.final_model);
        // remap branch features from backbone-local to global column indices
        for (auto& node : tree.nodes)
            if (!node.is_leaf)
                node.feature = result.backbone[static_cast<std::size_t>(node.feature)];
        support_rows(relevant_features(tree), sd, &out);
        tree_test_metrics(sd, tree, &out);
    }
    return out;
}

MetricList run_sis_enet(const ExperimentConfig& cfg, const SeedData& sd, std::uint64_t seed) {
    MetricList out;
    const Dataset& d = sd.train_std;
    const LossKind loss = loss_for(d);
    auto [screened, utilities] = screen(d, pick_alpha(cfg, d), loss);
    const Dataset reduced = d.select_features(screened);
    const SplitIndices split = holdout_split(reduced, cfg.holdout_ratio, derive_seed(seed, 0x51));
    auto [enet_cfg, sol] = elastic_net_cv(reduced, split, cfg.mus, cfg.effective_k_max(),
                                          cfg.grid_len, loss);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.p());
    std::vector<int> support;
    for (std::size_t j = 0; j < screened.size(); ++j) {
        w[screened[j]] = sol.w[static_cast<Eigen::Index>(j)];
        if (sol.w[static_cast<Eigen::Index>(j)] != 0.0) support.push_back(screened[j]);
    }
    support_rows(support, sd, &out);
    out.emplace_back("lambda", enet_cfg.lambda);
    out.emplace_back("mu", enet_cfg.mu);
    RegressorSolution global_sol = sol;
    global_sol.w = std::move(w);
    linear_test_metrics(cfg, sd, global_sol, &out);
    return out;
}

MetricList run_exact_sr(const ExperimentConfig& cfg, const SeedData& sd, std::uint64_t seed) {
    MetricList out;
    const Dataset& d = sd.train_std;
    const LossKind loss = loss_for(d);
    auto [screened, utilities] = screen(d, pick_alpha(cfg, d), loss);
    const Dataset reduced = d.select_features(screened);
    const SplitIndices split = holdout_split(reduced, cfg.holdout_ratio, derive_seed(seed, 0x51));
    const int k_cap = cfg.effective_k_max();
    const IncrementalKResult result =
        cv_incremental_k(reduced, split, std::min(cfg.k0, k_cap), cfg.k_step,
                         SparseSolver::CuttingPlanes, pick_gamma(cfg, reduced.n()), loss,
                         cfg.rel_tol, k_cap);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.p());
    std::vector<int> support;
    for (std::size_t j = 0; j < screened.size(); ++j) {
        w[screened[j]] = result.solution.w[static_cast<Eigen::Index>(j)];
        if (result.solution.w[static_cast<Eigen::Index>(j)] != 0.0)
            support.push_back(screened[j]);
    }
    support_rows(support, sd, &out);
    out.emplace_back("k_star", static_cast<double>(result.k_star));
    out.emplace_back("gap", result.solution.gap);
    RegressorSolution global_sol = result.solution;
    global_sol.w = std::move(w);
    linear_test_metrics(cfg, sd, global_sol, &out);
    return out;
}

MetricList run_tree_baseline(const ExperimentConfig& cfg, const SeedData& sd,
                             std::uint64_t seed) {
    MetricList out;
    const Dataset& d = sd.train_std;
    const SplitIndices split = holdout_split(d, cfg.holdout_ratio, derive_seed(seed, 0x51));
    const TreeMethod method =
        cfg.method == Method::Cart ? TreeMethod::Cart : TreeMethod::OctLocalSearch;
    auto [params, tree] = cv_tree(d, split, cfg.depth_grid, cfg.nmin_grid, cfg.lambda_grid,
                                  method, cfg.restarts, derive_seed(seed, 0x52));
    support_rows(relevant_features(tree), sd, &out);
    tree_test_metrics(sd, tree, &out);
    return out;
}

MetricList run_oracle(const ExperimentConfig& cfg, const SeedData& sd, std::uint64_t seed) {
    MetricList out;
    const Dataset& d = sd.train_std;
    if (!sd.has_truth) throw ConfigError("oracle method requires a synthetic ground truth");
    if (cfg.kind == ExperimentKind::SynthTree) {
        const Dataset reduced = d.select_features(sd.truth);
        const TreeParams tp = subproblem_tree_params(cfg);
        DecisionTree tree =
            fit_oct_local_search(reduced, tp, cfg.restarts, derive_seed(seed, 0x53));
        for (auto& node : tree.nodes)
            if (!node.is_leaf)
                node.feature = sd.truth[static_cast<std::size_t>(node.feature)];
        support_rows(relevant_features(tree), sd, &out);
        tree_test_metrics(sd, tree, &out);
    } else {
        const RegressorSolution sol =
            fit_on_support(d, sd.truth, pick_gamma(cfg, d.n()), loss_for(d));
        support_rows(sol.support, sd, &out);
        linear_test_metrics(cfg, sd, sol, &out);
    }
    return out;
}

MetricList run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const SeedData sd = prepare_data(cfg, seed);
    MetricList out;
    switch (cfg.method) {
        case Method::Backbone: out = run_backbone_method(cfg, sd, seed); break;
        case Method::SisEnet: out = run_sis_enet(cfg, sd, seed); break;
        case Method::ExactSR: out = run_exact_sr(cfg, sd, seed); break;
        case Method::Cart:
        case Method::OctLocalSearch: out = run_tree_baseline(cfg, sd, seed); break;
        case Method::Oracle: out = run_oracle(cfg, sd, seed); break;
    }
    out.emplace_back(
        "seconds",
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return out;
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    const std::string label = cfg.name + "#" + hash_buf;

    std::vector<MetricList> per_seed(cfg.seeds.size());
    std::vector<bool> failed(cfg.seeds.size(), false);
    std::vector<std::string> errors(cfg.seeds.size());

    const int workers = std::max(1, cfg.workers);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.seeds.size()) return;
            try {
                per_seed[i] = run_seed(cfg, cfg.seeds[i]);
            } catch (const std::exception& e) {
                failed[i] = true;
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1 || cfg.seeds.size() == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<int>(workers, static_cast<int>(cfg.seeds.size())); ++w)
            pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    ExperimentResults results;
    // metric order: first-seen order across seeds, stable across worker counts
    std::vector<std::string> metric_order;
    std::map<std::string, std::vector<double>> values;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::string seed_label = std::to_string(cfg.seeds[i]);
        if (failed[i]) {
            ++results.failed_seeds;
            results.rows.push_back({label, seed_label, "failed", 1.0});
            continue;
        }
        for (const auto& [metric, value] : per_seed[i]) {
            results.rows.push_back({label, seed_label, metric, value});
            if (!values.count(metric)) metric_order.push_back(metric);
            values[metric].push_back(value);
        }
    }
    for (const auto& metric : metric_order) {
        const auto& vs = values[metric];
        const double mean =
            std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(vs.size());
        double var = 0.0;
        for (double v : vs) var += (v - mean) * (v - mean);
        const double sd =
            vs.size() > 1 ? std::sqrt(var / static_cast<double>(vs.size() - 1)) : 0.0;
        results.rows.push_back({label, "mean", metric, mean});
        results.rows.push_back({label, "std", metric, sd});
    }
    if (!cfg.output_path.empty()) write_results_csv(cfg.output_path, results);
    return results;
}

std::string results_to_csv(const ExperimentResults& results) {
    std::ostringstream out;
    out << "experiment,seed,metric,value\n";
    char buf[64];
    for (const auto& row : results.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.value);
        out << row.experiment << ',' << row.seed << ',' << row.metric << ',' << buf << '\n';
    }
    return out.str();
}

void write_results_csv(const std::string& path, const ExperimentResults& results) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write results file: " + path);
    out << results_to_csv(results);
}

}  // namespace bb
