#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bb/backbone.hpp"
#include "bb/config.hpp"
#include "bb/dataset.hpp"
#include "bb/errors.hpp"
#include "bb/experiment.hpp"
#include "bb/metrics.hpp"
#include "bb/rng.hpp"
#include "bb/screening.hpp"
#include "bb/sparse_linear.hpp"
#include "bb/synthgen.hpp"
#include "bb/trees.hpp"

namespace {

bb::Task parse_task(const std::string& s) {
    if (s == "regression") return bb::Task::Regression;
    if (s == "binary") return bb::Task::BinaryClassification;
    if (s == "multi") return bb::Task::MultiClassification;
    throw bb::ConfigError("unknown task: " + s);
}

int env_workers() {
    const char* env = std::getenv("BACKBONE_WORKERS");
    if (!env) return 1;
    const int w = std::atoi(env);
    return w > 0 ? w : 1;
}

struct GenArgs {
    std::string kind = "linear";
    int n = 200, p = 1000, k = 10;
    double rho = 0.0, snr = 6.0;
    int depth = 3, r = 1;
    double balance = 0.5;
    std::uint64_t seed = 1;
    std::string output = "data.csv";
    std::string truth_output;
};

int cmd_gen(const GenArgs& args) {
    bb::Dataset d;
    if (args.kind == "linear" || args.kind == "logistic") {
        auto [data, truth] =
            args.kind == "linear"
                ? bb::gen_linear(args.n, args.p, args.k, args.rho, args.snr, args.seed)
                : bb::gen_logistic(args.n, args.p, args.k, args.rho, args.snr, args.seed);
        d = std::move(data);
        if (!args.truth_output.empty()) {
            std::ofstream out(args.truth_output);
            out << "feature,sign\n";
            for (int j : truth.support)
                out << j << ',' << (truth.w_true[j] > 0 ? 1 : -1) << '\n';
        }
    } else if (args.kind == "tree") {
        bb::TreeGenConfig cfg;
        cfg.depth = args.depth;
        cfg.k = args.k;
        cfg.r = args.r;
        cfg.balance = args.balance;
        auto [data, truth] = bb::gen_tree_data(args.n, args.p, cfg, args.rho, args.seed);
        d = std::move(data);
        if (!args.truth_output.empty()) {
            std::ofstream out(args.truth_output);
            out << bb::print_tree(truth.tree);
        }
    } else {
        throw bb::ConfigError("unknown generator kind: " + args.kind);
    }
    bb::write_csv(args.output, d);
    std::cout << "wrote " << d.n() << "x" << d.p() << " dataset to " << args.output << "\n";
    return 0;
}

struct ScreenArgs {
    std::string input;
    std::string response = "y";
    std::string task = "regression";
    double alpha = 0.0;
    std::string output;
};

int cmd_screen(const ScreenArgs& args) {
    bb::Dataset d = bb::load_csv(args.input, args.response, parse_task(args.task));
    auto [std_d, stats] = bb::standardize(d);
    const double alpha =
        args.alpha > 0.0 ? args.alpha : bb::default_alpha(std_d.n(), std_d.p());
    const bb::LossKind loss = std_d.task == bb::Task::Regression ? bb::LossKind::Squared
                                                                 : bb::LossKind::Logistic;
    auto [selected, utilities] = bb::screen(std_d, alpha, loss);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.output.empty()) {
        file.open(args.output);
        out = &file;
    }
    *out << "feature,utility,selected\n";
    std::vector<bool> mask(static_cast<std::size_t>(std_d.p()), false);
    for (int j : selected) mask[static_cast<std::size_t>(j)] = true;
    char buf[64];
    for (Eigen::Index j = 0; j < std_d.p(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", utilities.s[j]);
        *out << j << ',' << buf << ',' << (mask[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
    }
    return 0;
}

struct SrArgs {
    std::string input;
    std::string response = "y";
    std::string task = "regression";
    std::string solver = "cutting_planes";
    int k = 5;
    double gamma = 0.0;
    std::uint64_t seed = 1;
    std::string output;
};

int cmd_sr(const SrArgs& args) {
    bb::Dataset d = bb::load_csv(args.input, args.response, parse_task(args.task));
    auto [std_d, stats] = bb::standardize(d);
    const bb::LossKind loss = std_d.task == bb::Task::Regression ? bb::LossKind::Squared
                                                                 : bb::LossKind::Logistic;
    const double gamma =
        args.gamma > 0.0 ? args.gamma : 1.0 / std::sqrt(static_cast<double>(std_d.n()));
    bb::RegressorSolution sol;
    if (args.solver == "cutting_planes") {
        bb::CuttingPlaneConfig cfg;
        cfg.k = args.k;
        cfg.gamma = gamma;
        cfg.loss = loss;
        sol = bb::fit_exact_cutting_planes(std_d, cfg);
    } else if (args.solver == "subgradient") {
        bb::SubgradientConfig cfg;
        cfg.k = args.k;
        cfg.gamma = gamma;
        cfg.loss = loss;
        sol = bb::fit_relaxation_subgradient(std_d, cfg);
    } else if (args.solver == "brute") {
        sol = bb::brute_force_best_subset(std_d, args.k, gamma, loss);
    } else {
        throw bb::ConfigError("unknown solver: " + args.solver);
    }
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.output.empty()) {
        file.open(args.output);
        out = &file;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", sol.objective);
    *out << "# objective=" << buf << " gap=";
    std::snprintf(buf, sizeof(buf), "%.17g", sol.gap);
    *out << buf << " gamma=";
    std::snprintf(buf, sizeof(buf), "%.17g", sol.gamma);
    *out << buf << " k=" << args.k << "\n";
    *out << "feature,coefficient\n";
    for (int j : sol.support) {
        std::snprintf(buf, sizeof(buf), "%.17g", sol.w[j]);
        *out << j << ',' << buf << '\n';
    }
    return 0;
}

struct TreeArgs {
    std::string input;
    std::string response = "y";
    std::string method = "cart";
    int depth = 3;
    int nmin = 1;
    double lambda = 0.0;
    int restarts = 3;
    std::uint64_t seed = 1;
    std::string output;
};

int cmd_tree(const TreeArgs& args) {
    bb::Dataset d = bb::load_csv(args.input, args.response, bb::Task::BinaryClassification);
    bb::TreeParams params;
    params.max_depth = args.depth;
    params.min_bucket = args.nmin;
    params.complexity_weight = args.lambda;
    const bb::DecisionTree tree =
        args.method == "cart"
            ? bb::fit_cart(d, params)
            : bb::fit_oct_local_search(d, params, args.restarts, args.seed);
    const std::string text = bb::print_tree(tree);
    if (args.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.output);
        out << text;
    }
    return 0;
}

struct AdviseArgs {
    long n = 200;
    long p = 1000;
    int k = 10;
    double beta = 0.5;
    double p_sub = 0.1;
    double phi = 0.5;
    bool empirical = false;
};

int cmd_advise(const AdviseArgs& args) {
    const bb::HyperparameterAdvice advice = bb::recommend_hyperparameters(
        args.n, args.p, args.k, args.beta, args.p_sub, args.phi, args.empirical);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", advice.alpha);
    std::cout << "alpha=" << buf << " (keep ceil(alpha*p)="
              << static_cast<long>(std::ceil(advice.alpha * static_cast<double>(args.p)))
              << " features)\n";
    std::cout << "subproblems=" << advice.num_subproblems << "\n";
    return 0;
}

struct ExperimentArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

bb::ExperimentConfig build_experiment_config(const ExperimentArgs& args) {
    bb::KeyValueConfig kv = args.config_path.empty()
                                ? bb::KeyValueConfig::parse_text("")
                                : bb::KeyValueConfig::parse_file(args.config_path);
    for (const auto& o : args.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos)
            throw bb::ConfigError("override must be key=value: " + o);
        kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (!kv.has("workers")) kv.set("workers", std::to_string(env_workers()));
    return bb::ExperimentConfig::from_config(kv);
}

int cmd_experiment(const ExperimentArgs& args) {
    const bb::ExperimentConfig cfg = build_experiment_config(args);
    const bb::ExperimentResults results = bb::run_experiment(cfg);
    if (cfg.output_path.empty()) std::cout << bb::results_to_csv(results);
    if (results.failed_seeds > 0) {
        std::cerr << results.failed_seeds << " seed(s) failed\n";
        return 2;
    }
    return 0;
}

int cmd_backbone(const ExperimentArgs& args) {
    bb::ExperimentConfig cfg = build_experiment_config(args);
    cfg.method = bb::Method::Backbone;
    const bb::ExperimentResults results = bb::run_experiment(cfg);
    std::cout << bb::results_to_csv(results);
    return results.failed_seeds > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"backbone: sparse learning via screening and subproblem unions"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->add_option("--kind", gen_args.kind, "linear | logistic | tree");
    gen->add_option("--n", gen_args.n);
    gen->add_option("--p", gen_args.p);
    gen->add_option("--k", gen_args.k);
    gen->add_option("--rho", gen_args.rho);
    gen->add_option("--snr", gen_args.snr);
    gen->add_option("--depth", gen_args.depth);
    gen->add_option("--r", gen_args.r);
    gen->add_option("--balance", gen_args.balance);
    gen->add_option("--seed", gen_args.seed);
    gen->add_option("--output", gen_args.output);
    gen->add_option("--truth-output", gen_args.truth_output);

    ScreenArgs screen_args;
    auto* screen = app.add_subcommand("screen", "rank features by marginal utility");
    screen->add_option("--input", screen_args.input)->required();
    screen->add_option("--response", screen_args.response);
    screen->add_option("--task", screen_args.task);
    screen->add_option("--alpha", screen_args.alpha);
    screen->add_option("--output", screen_args.output);

    SrArgs sr_args;
    auto* sr = app.add_subcommand("sr", "sparse regression on a CSV dataset");
    sr->add_option("--input", sr_args.input)->required();
    sr->add_option("--response", sr_args.response);
    sr->add_option("--task", sr_args.task);
    sr->add_option("--solver", sr_args.solver, "cutting_planes | subgradient | brute");
    sr->add_option("--k", sr_args.k);
    sr->add_option("--gamma", sr_args.gamma);
    sr->add_option("--seed", sr_args.seed);
    sr->add_option("--output", sr_args.output);

    TreeArgs tree_args;
    auto* tree = app.add_subcommand("tree", "fit a classification tree");
    tree->add_option("--input", tree_args.input)->required();
    tree->add_option("--response", tree_args.response);
    tree->add_option("--method", tree_args.method, "cart | oct");
    tree->add_option("--depth", tree_args.depth);
    tree->add_option("--nmin", tree_args.nmin);
    tree->add_option("--lambda", tree_args.lambda);
    tree->add_option("--restarts", tree_args.restarts);
    tree->add_option("--seed", tree_args.seed);
    tree->add_option("--output", tree_args.output);

    AdviseArgs advise_args;
    auto* advise = app.add_subcommand("advise", "suggest screening fraction and subproblem count");
    advise->add_option("--n", advise_args.n);
    advise->add_option("--p", advise_args.p);
    advise->add_option("--k", advise_args.k);
    advise->add_option("--beta", advise_args.beta);
    advise->add_option("--p-sub", advise_args.p_sub);
    advise->add_option("--phi", advise_args.phi);
    advise->add_flag("--empirical", advise_args.empirical,
                     "use the empirical subproblem-count rule");

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "run a configured experiment");
    experiment->add_option("--config", exp_args.config_path, "key = value config file");
    experiment->add_option("--set", exp_args.overrides, "key=value override, repeatable");

    ExperimentArgs bb_args;
    auto* backbone = app.add_subcommand("backbone", "run the backbone method end to end");
    backbone->add_option("--config", bb_args.config_path, "key = value config file");
    backbone->add_option("--set", bb_args.overrides, "key=value override, repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_args);
        if (screen->parsed()) return cmd_screen(screen_args);
        if (sr->parsed()) return cmd_sr(sr_args);
        if (tree->parsed()) return cmd_tree(tree_args);
        if (advise->parsed()) return cmd_advise(advise_args);
        if (experiment->parsed()) return cmd_experiment(exp_args);
        if (backbone->parsed()) return cmd_backbone(bb_args);
    } catch (const bb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
