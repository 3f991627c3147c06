#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "bb/errors.hpp"
#include "bb/metrics.hpp"
#include "bb/rng.hpp"

using namespace bb;

TEST_CASE("support recovery hand examples") {
    const SupportMetrics m = support_metrics({1, 3, 5, 9}, {1, 3, 7});
    CHECK(m.sr_acc == doctest::Approx(2.0 / 3.0));
    CHECK(m.sr_fa == doctest::Approx(2.0 / 4.0));
    CHECK(m.selected_size == 4);

    const SupportMetrics exact = support_metrics({2, 4}, {2, 4});
    CHECK(exact.sr_acc == 1.0);
    CHECK(exact.sr_fa == 0.0);

    const SupportMetrics none = support_metrics({}, {1, 2});
    CHECK(none.sr_acc == 0.0);
    CHECK(none.sr_fa == 0.0);  // nothing selected, nothing false
    CHECK(none.selected_size == 0);
}

TEST_CASE("empty truth counts as perfect recovery") {
    const SupportMetrics m = support_metrics({3, 4}, {});
    CHECK(m.sr_acc == 1.0);
    CHECK(m.sr_fa == 1.0);  // everything selected is spurious
}

TEST_CASE("duplicate selections collapse before scoring") {
    const SupportMetrics m = support_metrics({1, 1, 1, 2}, {1});
    CHECK(m.selected_size == 2);
    CHECK(m.sr_acc == 1.0);
    CHECK(m.sr_fa == doctest::Approx(0.5));
}

TEST_CASE("r2 of a perfect and a mean prediction") {
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    CHECK(r2(y, y) == doctest::Approx(1.0));
    const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(4, 2.5);
    CHECK(r2(y, mean_pred) == doctest::Approx(0.0));
    Eigen::VectorXd off(4);
    off << 2, 3, 4, 5;  // SSE 4, SST 5
    CHECK(r2(y, off) == doctest::Approx(1.0 - 4.0 / 5.0));
}

TEST_CASE("r2 rejects a constant response") {
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 3.0);
    CHECK_THROWS_AS(r2(y, y), ConstantResponse);
    Eigen::VectorXd one(1);
    one << 2.0;
    CHECK_THROWS_AS(r2(one, one), ConstantResponse);
}

TEST_CASE("auc hand values") {
    Eigen::VectorXd labels(4), scores(4);
    labels << 1, 1, -1, -1;
    scores << 0.9, 0.8, 0.2, 0.1;
    CHECK(auc(labels, scores) == 1.0);
    scores << 0.1, 0.2, 0.8, 0.9;  // perfectly inverted
    CHECK(auc(labels, scores) == 0.0);
    scores << 0.5, 0.5, 0.5, 0.5;  // all tied
    CHECK(auc(labels, scores) == doctest::Approx(0.5));
    scores << 0.9, 0.3, 0.5, 0.1;  // one inversion among 4 pairs
    CHECK(auc(labels, scores) == doctest::Approx(0.75));
}

TEST_CASE("auc matches the exhaustive pair count") {
    Rng rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.4);
    std::uniform_int_distribution<int> coarse(0, 4);  // forces ties
    Eigen::VectorXd labels(20), scores(20);
    for (int i = 0; i < 20; ++i) {
        labels[i] = coin(rng) ? 1.0 : -1.0;
        scores[i] = static_cast<double>(coarse(rng)) + 0.5 * gauss(rng) * 0.0;
    }
    labels[0] = 1.0;
    labels[1] = -1.0;  // both classes present
    double wins = 0.0;
    long pairs = 0;
    for (int i = 0; i < 20; ++i) {
        if (labels[i] < 0) continue;
        for (int j = 0; j < 20; ++j) {
            if (labels[j] > 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    CHECK(auc(labels, scores) == doctest::Approx(wins / static_cast<double>(pairs)));
}

TEST_CASE("auc is invariant to monotone score transforms") {
    Eigen::VectorXd labels(6), scores(6);
    labels << 1, -1, 1, -1, 1, -1;
    scores << 2.0, 1.0, 0.5, 0.4, 3.0, 2.5;
    const double base = auc(labels, scores);
    Eigen::VectorXd warped = scores;
    for (Eigen::Index i = 0; i < 6; ++i) warped[i] = std::exp(3.0 * scores[i]) - 7.0;
    CHECK(auc(labels, warped) == doctest::Approx(base));
}

TEST_CASE("auc requires both classes") {
    Eigen::VectorXd labels = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd scores(3);
    scores << 0.1, 0.2, 0.3;
    CHECK_THROWS_AS(auc(labels, scores), SingleClass);
}

TEST_CASE("tree structure metrics count distinct split features") {
    DecisionTree t;
    t.nodes.resize(5);
    t.nodes[0] = {false, 3, 0.0, 0, {}, 1, 2};
    t.nodes[1] = {false, 8, 0.0, 0, {}, 3, 4};
    t.nodes[2].label = 1;
    t.nodes[3].label = 0;
    t.nodes[4].label = 1;
    const TreeStructureMetrics m = tree_structure_metrics(t, {3, 5});
    CHECK(m.fraction_relevant == doctest::Approx(0.5));
    CHECK(m.depth == 2);
}

TEST_CASE("a root leaf is vacuously relevant") {
    DecisionTree t;
    t.nodes.resize(1);
    t.nodes[0].label = 1;
    const TreeStructureMetrics m = tree_structure_metrics(t, {0, 1});
    CHECK(m.fraction_relevant == 1.0);
    CHECK(m.depth == 0);
}
