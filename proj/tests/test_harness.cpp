#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "bb/config.hpp"
#include "bb/errors.hpp"
#include "bb/experiment.hpp"

using namespace bb;

namespace {

double metric_value(const ExperimentResults& r, const std::string& seed,
                    const std::string& metric) {
    for (const auto& row : r.rows)
        if (row.seed == seed && row.metric == metric) return row.value;
    FAIL("missing metric ", metric, " for seed ", seed);
    return 0.0;
}

bool has_metric(const ExperimentResults& r, const std::string& seed,
                const std::string& metric) {
    for (const auto& row : r.rows)
        if (row.seed == seed && row.metric == metric) return true;
    return false;
}

}  // namespace

TEST_CASE("key-value files parse comments, blanks, and types") {
    const KeyValueConfig kv = KeyValueConfig::parse_text(
        "# a comment\n"
        "\n"
        "n = 42\n"
        "snr = 2.5\n"
        "early_stop = true\n"
        "mus = 0.1, 0.9\n"
        "name = trial one\n");
    CHECK(kv.get_int("n", 0) == 42);
    CHECK(kv.get_double("snr", 0.0) == 2.5);
    CHECK(kv.get_bool("early_stop", false));
    CHECK(kv.get_doubles("mus", {}) == std::vector<double>{0.1, 0.9});
    CHECK(kv.get_string("name", "") == "trial one");
    CHECK(kv.get_int("missing", 7) == 7);
    CHECK_THROWS_AS(kv.get_int("name", 0), ConfigError);
}

TEST_CASE("a repeated key is an error naming both lines") {
    try {
        KeyValueConfig::parse_text("n = 1\nsnr = 2\nn = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("line 3") != std::string::npos);
        CHECK(what.find("line 1") != std::string::npos);
        CHECK(what.find("'n'") != std::string::npos);
    }
    CHECK_THROWS_AS(KeyValueConfig::parse_text("just words\n"), ConfigError);
}

TEST_CASE("unknown experiment keys are rejected by name") {
    const KeyValueConfig kv = KeyValueConfig::parse_text("n = 10\nbanana = 3\n");
    try {
        ExperimentConfig::from_config(kv);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("banana") != std::string::npos);
    }
}

TEST_CASE("overrides replace file values and feed the label hash") {
    KeyValueConfig kv = KeyValueConfig::parse_text("n = 100\np = 500\nk = 5\n");
    const std::uint64_t before = kv.hash();
    kv.set("n", "200");
    CHECK(kv.hash() != before);
    const ExperimentConfig cfg = ExperimentConfig::from_config(kv);
    CHECK(cfg.n == 200);
    CHECK(cfg.p == 500);
    CHECK(cfg.config_hash == kv.hash());
}

TEST_CASE("an empty config gives the documented defaults") {
    const ExperimentConfig cfg = ExperimentConfig::from_config(KeyValueConfig::parse_text(""));
    CHECK(cfg.kind == ExperimentKind::SynthLinear);
    CHECK(cfg.method == Method::Backbone);
    CHECK(cfg.n == 200);
    CHECK(cfg.p == 1000);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
    CHECK(cfg.name == "synth_linear-backbone");
    CHECK(cfg.mus == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(cfg.workers == 1);
}

TEST_CASE("the per-subproblem support cap defaults by experiment kind") {
    ExperimentConfig cfg;
    cfg.k = 7;
    CHECK(cfg.effective_k_max() == 7);
    cfg.k_max = 3;
    CHECK(cfg.effective_k_max() == 3);
    cfg.k_max = 0;
    cfg.kind = ExperimentKind::SynthTree;
    cfg.tree_depth = 3;
    CHECK(cfg.effective_k_max() == 7);  // a depth-3 tree has at most 7 branches
}

TEST_CASE("a linear run emits labeled per-seed and aggregate rows") {
    const KeyValueConfig kv = KeyValueConfig::parse_text(
        "kind = synth_linear\nmethod = backbone\n"
        "n = 80\np = 60\nk = 3\nsnr = 10\n"
        "subproblems = 3\nbeta = 0.6\nb_max = 20\nk_max = 3\nk0 = 3\nk_step = 1\n"
        "seeds = 1, 2\n");
    const ExperimentConfig cfg = ExperimentConfig::from_config(kv);
    const ExperimentResults r = run_experiment(cfg);
    CHECK(r.failed_seeds == 0);

    char expect_label[64];
    std::snprintf(expect_label, sizeof(expect_label), "synth_linear-backbone#%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    for (const auto& row : r.rows) CHECK(row.experiment == expect_label);

    for (const std::string seed : {"1", "2"}) {
        CHECK(has_metric(r, seed, "backbone_size"));
        CHECK(has_metric(r, seed, "iterations"));
        CHECK(has_metric(r, seed, "h_bound"));
        CHECK(has_metric(r, seed, "sr_acc"));
        CHECK(has_metric(r, seed, "r2"));
        CHECK(has_metric(r, seed, "seconds"));
        CHECK(metric_value(r, seed, "selected_size") <= 20.0);
    }

    // aggregates recompute from the per-seed rows
    std::map<std::string, std::vector<double>> by_metric;
    for (const auto& row : r.rows)
        if (row.seed == "1" || row.seed == "2") by_metric[row.metric].push_back(row.value);
    for (const auto& [metric, vs] : by_metric) {
        REQUIRE(vs.size() == 2);
        const double mean = (vs[0] + vs[1]) / 2.0;
        const double sd = std::sqrt((vs[0] - mean) * (vs[0] - mean) +
                                    (vs[1] - mean) * (vs[1] - mean));
        CHECK(metric_value(r, "mean", metric) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(metric_value(r, "std", metric) == doctest::Approx(sd).epsilon(1e-9));
    }
}

TEST_CASE("worker counts do not change the emitted CSV") {
    const std::string base =
        "kind = synth_tree\nmethod = cart\n"
        "n = 120\np = 15\nk = 3\ndepth = 2\n"
        "depth_grid = 2\nnmin_grid = 1\nlambda_grid = 0\n"
        "seeds = 1, 2, 3, 4\n";
    KeyValueConfig kv1 = KeyValueConfig::parse_text(base);
    kv1.set("workers", "1");
    KeyValueConfig kv4 = KeyValueConfig::parse_text(base);
    kv4.set("workers", "4");
    const ExperimentResults serial = run_experiment(ExperimentConfig::from_config(kv1));
    const ExperimentResults parallel = run_experiment(ExperimentConfig::from_config(kv4));
    // the worker count feeds the label hash, so compare rows without labels
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].seed == parallel.rows[i].seed);
        CHECK(serial.rows[i].metric == parallel.rows[i].metric);
        if (serial.rows[i].metric != "seconds")  // wall time is not deterministic
            CHECK(serial.rows[i].value == parallel.rows[i].value);
    }
}

TEST_CASE("a generous backbone budget reproduces the direct exact fit") {
    const std::string base =
        "kind = synth_linear\n"
        "n = 100\np = 30\nk = 3\nsnr = 20\n"
        "alpha = 1\nsubproblems = 2\nbeta = 1\nb_max = 30\nk_max = 3\n"
        "k0 = 3\nk_step = 1\nseeds = 3\n";
    KeyValueConfig kvb = KeyValueConfig::parse_text(base);
    kvb.set("method", "backbone");
    KeyValueConfig kve = KeyValueConfig::parse_text(base);
    kve.set("method", "exact_sr");
    const ExperimentResults rb = run_experiment(ExperimentConfig::from_config(kvb));
    const ExperimentResults re = run_experiment(ExperimentConfig::from_config(kve));
    CHECK(metric_value(rb, "3", "sr_acc") == 1.0);
    CHECK(metric_value(re, "3", "sr_acc") == 1.0);
    CHECK(metric_value(rb, "3", "sr_fa") == 0.0);
    CHECK(metric_value(re, "3", "sr_fa") == 0.0);
    CHECK(metric_value(rb, "3", "selected_size") ==
          metric_value(re, "3", "selected_size"));
}

TEST_CASE("a broken seed becomes a failed row instead of aborting") {
    const KeyValueConfig kv = KeyValueConfig::parse_text(
        "kind = real_csv\ncsv_path = /nonexistent/file.csv\nseeds = 1, 2\n");
    const ExperimentResults r = run_experiment(ExperimentConfig::from_config(kv));
    CHECK(r.failed_seeds == 2);
    int failed_rows = 0;
    for (const auto& row : r.rows)
        if (row.metric == "failed") ++failed_rows;
    CHECK(failed_rows == 2);
}

TEST_CASE("results serialize as long-form CSV with a header") {
    ExperimentResults r;
    r.rows.push_back({"exp#00", "1", "r2", 0.5});
    r.rows.push_back({"exp#00", "mean", "r2", 0.5});
    const std::string csv = results_to_csv(r);
    CHECK(csv == "experiment,seed,metric,value\nexp#00,1,r2,0.5\nexp#00,mean,r2,0.5\n");

    const std::string path = "/tmp/bb_test_results.csv";
    write_results_csv(path, r);
    std::ifstream in(path);
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CHECK(contents == csv);
    std::remove(path.c_str());
}
