#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "bb/backbone.hpp"
#include "bb/errors.hpp"
#include "bb/rng.hpp"
#include "bb/synthgen.hpp"

using namespace bb;

namespace {

struct SubView {
    Eigen::Index p = 0;
    std::uint64_t seed = 0;
};

SubproblemFitter view_fitter() {
    return [](const Dataset& d, std::uint64_t seed) {
        return std::any(SubView{d.p(), seed});
    };
}

/// Extractor returning `count` pseudo-random local indices per subproblem.
RelevantExtractor random_extractor(int count) {
    return [count](const std::any& model) {
        const SubView view = std::any_cast<SubView>(model);
        Rng rng(view.seed);
        std::vector<int> all(static_cast<std::size_t>(view.p));
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(static_cast<std::size_t>(std::min<Eigen::Index>(count, view.p)));
        return all;
    };
}

FinalFitter null_final() {
    return [](const Dataset&, std::uint64_t) { return FinalModel{}; };
}

Dataset planted(int n, int p, std::uint64_t seed) {
    return gen_linear(n, p, std::min(5, p), 0.2, 4.0, seed).first;
}

}  // namespace

TEST_CASE("iteration bound follows the halving formula") {
    const Dataset d = planted(40, 30, 1);
    BackboneConfig cfg;
    cfg.backbone_max = 250;
    cfg.k_max = 50;
    cfg.num_subproblems = 10;
    auto fixed = [](const std::any&) { return std::vector<int>{0}; };
    BackboneResult r = run_backbone(d, cfg, view_fitter(), fixed, null_final());
    CHECK(r.h_bound == 2);  // ceil(log2(500/250) + 1)

    cfg.num_subproblems = 16;
    cfg.k_max = 10;
    cfg.backbone_max = 10;
    r = run_backbone(d, cfg, view_fitter(), fixed, null_final());
    CHECK(r.h_bound == 5);  // ceil(log2(16) + 1)

    cfg.num_subproblems = 1;
    cfg.k_max = 1;
    cfg.backbone_max = 1000;
    r = run_backbone(d, cfg, view_fitter(), fixed, null_final());
    CHECK(r.h_bound == 1);  // never below one iteration
}

TEST_CASE("a roomy backbone budget finishes in one iteration") {
    const Dataset d = planted(50, 40, 2);
    BackboneConfig cfg;
    cfg.num_subproblems = 4;
    cfg.beta = 0.5;
    cfg.backbone_max = 40;
    cfg.k_max = 3;
    const BackboneResult r =
        run_backbone(d, cfg, view_fitter(), random_extractor(3), null_final());
    CHECK(r.iterations_used == 1);
    CHECK(r.per_subproblem.size() == 4);
    // backbone is exactly the union of the per-subproblem extracts
    std::set<int> expected;
    for (const auto& rec : r.per_subproblem)
        expected.insert(rec.extracted.begin(), rec.extracted.end());
    CHECK(r.backbone == std::vector<int>(expected.begin(), expected.end()));
    CHECK(std::is_sorted(r.backbone.begin(), r.backbone.end()));
}

TEST_CASE("subproblem extracts map to global candidate indices") {
    const Dataset d = planted(40, 60, 3);
    BackboneConfig cfg;
    cfg.alpha = 0.5;  // candidates are 30 of the 60 columns
    cfg.num_subproblems = 3;
    cfg.beta = 0.4;
    cfg.backbone_max = 60;
    cfg.k_max = 4;
    const BackboneResult r =
        run_backbone(d, cfg, view_fitter(), random_extractor(4), null_final());
    const std::set<int> screened(r.screened.begin(), r.screened.end());
    CHECK(screened.size() == 30);
    for (const auto& rec : r.per_subproblem) {
        CHECK(rec.features.size() == 12);  // ceil(0.4 * 30)
        for (int j : rec.features) CHECK(screened.count(j) == 1);
        for (int j : rec.extracted)
            CHECK(std::binary_search(rec.features.begin(), rec.features.end(), j));
    }
}

TEST_CASE("extractors breaking the size contract are rejected") {
    const Dataset d = planted(30, 20, 4);
    BackboneConfig cfg;
    cfg.k_max = 2;
    auto too_many = [](const std::any&) { return std::vector<int>{0, 1, 2}; };
    CHECK_THROWS_AS(run_backbone(d, cfg, view_fitter(), too_many, null_final()),
                    ContractViolation);
    auto out_of_range = [](const std::any&) { return std::vector<int>{10000}; };
    CHECK_THROWS_AS(run_backbone(d, cfg, view_fitter(), out_of_range, null_final()),
                    ContractViolation);
}

TEST_CASE("an all-empty extraction falls back to the top screened features") {
    const Dataset d = planted(40, 50, 5);
    BackboneConfig cfg;
    cfg.backbone_max = 8;
    cfg.k_max = 3;
    auto nothing = [](const std::any&) { return std::vector<int>{}; };
    const BackboneResult r = run_backbone(d, cfg, view_fitter(), nothing, null_final());
    CHECK(r.empty_backbone_fallback);
    CHECK(r.backbone.size() == 8);
    CHECK(r.backbone == top_by_utility(r.utilities.s, 8));
}

TEST_CASE("oversized unions contract across iterations") {
    const Dataset d = planted(50, 200, 6);
    BackboneConfig cfg;
    cfg.num_subproblems = 8;
    cfg.beta = 0.5;
    cfg.backbone_max = 30;
    cfg.k_max = 20;
    const BackboneResult r =
        run_backbone(d, cfg, view_fitter(), random_extractor(20), null_final());
    CHECK(r.iterations_used >= 2);
    CHECK(r.iterations_used <= r.h_bound);
    if (!r.stalled) CHECK(static_cast<int>(r.backbone.size()) <= 30);
    // later iterations draw from ever-smaller candidate pools
    std::vector<std::set<int>> pool_by_iter;
    for (const auto& rec : r.per_subproblem) {
        if (static_cast<int>(pool_by_iter.size()) <= rec.iteration)
            pool_by_iter.emplace_back();
        pool_by_iter[static_cast<std::size_t>(rec.iteration)].insert(rec.features.begin(),
                                                                     rec.features.end());
    }
    for (std::size_t t = 1; t < pool_by_iter.size(); ++t)
        for (int j : pool_by_iter[t]) CHECK(pool_by_iter[0].count(j) == 1);
}

TEST_CASE("two silent subproblems trigger the early stop") {
    const Dataset d = planted(40, 30, 7);
    BackboneConfig cfg;
    cfg.num_subproblems = 6;
    cfg.beta = 1.0;  // every subproblem sees all candidates
    cfg.backbone_max = 30;
    cfg.k_max = 2;
    cfg.early_stop = true;
    auto fixed = [](const std::any&) { return std::vector<int>{0, 1}; };
    const BackboneResult r = run_backbone(d, cfg, view_fitter(), fixed, null_final());
    CHECK(r.early_stopped);
    CHECK(r.per_subproblem.size() == 3);  // adds, no-add, no-add, stop
    CHECK(r.backbone.size() == 2);
}

TEST_CASE("construction is deterministic in the seed") {
    const Dataset d = planted(40, 80, 8);
    BackboneConfig cfg;
    cfg.num_subproblems = 5;
    cfg.beta = 0.3;
    cfg.backbone_max = 20;
    cfg.k_max = 4;
    cfg.seed = 99;
    const BackboneResult a =
        run_backbone(d, cfg, view_fitter(), random_extractor(4), null_final());
    const BackboneResult b =
        run_backbone(d, cfg, view_fitter(), random_extractor(4), null_final());
    CHECK(a.backbone == b.backbone);
    REQUIRE(a.per_subproblem.size() == b.per_subproblem.size());
    for (std::size_t i = 0; i < a.per_subproblem.size(); ++i) {
        CHECK(a.per_subproblem[i].features == b.per_subproblem[i].features);
        CHECK(a.per_subproblem[i].extracted == b.per_subproblem[i].extracted);
    }
    cfg.seed = 100;
    const BackboneResult c =
        run_backbone(d, cfg, view_fitter(), random_extractor(4), null_final());
    CHECK(a.per_subproblem[0].features != c.per_subproblem[0].features);
}

TEST_CASE("the final fit sees exactly the backbone columns") {
    const Dataset d = planted(60, 50, 9);
    BackboneConfig cfg;
    cfg.num_subproblems = 3;
    cfg.backbone_max = 50;
    cfg.k_max = 5;
    Eigen::Index final_p = -1;
    FinalFitter final = [&final_p](const Dataset& reduced, std::uint64_t) {
        final_p = reduced.p();
        RegressorSolution sol;
        sol.w = Eigen::VectorXd::Ones(reduced.p());
        return FinalModel{sol};
    };
    const BackboneResult r =
        run_backbone(d, cfg, view_fitter(), random_extractor(5), final);
    CHECK(final_p == static_cast<Eigen::Index>(r.backbone.size()));
    REQUIRE(std::holds_alternative<RegressorSolution>(r.final_model));
    CHECK(std::get<RegressorSolution>(r.final_model).w.size() == final_p);
}

TEST_CASE("recovery diagnostics accumulate over the subproblem sequence") {
    BackboneResult r;
    r.per_subproblem = {
        {0, 0, {}, {1}},
        {0, 1, {}, {2, 9}},
        {0, 2, {}, {}},
        {1, 0, {}, {3, 1}},
    };
    const BackboneDiagnostics diag = backbone_diagnostics(r, {1, 2, 3});
    REQUIRE(diag.per_subproblem.size() == 4);
    CHECK(diag.per_subproblem[0] == doctest::Approx(1.0 / 3.0));
    CHECK(diag.per_subproblem[1] == doctest::Approx(1.0 / 3.0));
    CHECK(diag.per_subproblem[2] == 0.0);
    CHECK(diag.per_subproblem[3] == doctest::Approx(2.0 / 3.0));
    CHECK(diag.cumulative[0] == doctest::Approx(1.0 / 3.0));
    CHECK(diag.cumulative[1] == doctest::Approx(2.0 / 3.0));
    CHECK(diag.cumulative[2] == doctest::Approx(2.0 / 3.0));
    CHECK(diag.cumulative[3] == doctest::Approx(1.0));

    const BackboneDiagnostics empty = backbone_diagnostics(r, {});
    for (double v : empty.cumulative) CHECK(v == 1.0);
}

TEST_CASE("advice follows the sample-driven screening fraction") {
    const HyperparameterAdvice a = recommend_hyperparameters(10000, 1000000, 10, 0.5);
    CHECK(a.alpha == doctest::Approx(std::sqrt(10000.0) / 1000000.0));
    const HyperparameterAdvice wide = recommend_hyperparameters(10000, 50, 5, 0.5);
    CHECK(wide.alpha == 1.0);  // capped
}

TEST_CASE("certain per-subproblem recovery needs a single subproblem") {
    const HyperparameterAdvice a = recommend_hyperparameters(100, 1000, 5, 1.0, 0.0);
    CHECK(a.num_subproblems == 1);
}

TEST_CASE("subproblem counts shrink as beta grows") {
    const int m_small = recommend_hyperparameters(500, 20000, 10, 0.3).num_subproblems;
    const int m_large = recommend_hyperparameters(500, 20000, 10, 0.7).num_subproblems;
    CHECK(m_small >= m_large);
    CHECK(m_large >= 1);
}

TEST_CASE("the empirical sizing rule matches its closed form") {
    const long n = 500, p = 20000;
    const int k = 10;
    const double beta = 0.5;
    const HyperparameterAdvice a =
        recommend_hyperparameters(n, p, k, beta, 0.1, 0.5, true);
    const double alpha = std::min(1.0, std::sqrt(static_cast<double>(n)) / p);
    const double expect =
        5.0 + std::log(alpha * p * k) / (5.0 * std::log(1.0 / (1.0 - beta)));
    CHECK(a.num_subproblems == static_cast<int>(std::ceil(expect)));
}

TEST_CASE("advice rejects out-of-range settings") {
    CHECK_THROWS_AS(recommend_hyperparameters(100, 1000, 5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(recommend_hyperparameters(100, 1000, 5, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(recommend_hyperparameters(100, 1000, 5, 0.5, 1.0),
                    std::invalid_argument);
}
