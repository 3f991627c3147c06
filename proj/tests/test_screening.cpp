#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "bb/dataset.hpp"
#include "bb/rng.hpp"
#include "bb/screening.hpp"
#include "bb/synthgen.hpp"

using namespace bb;

namespace {

Dataset gaussian_regression(int n, int p, std::uint64_t seed) {
    Dataset d;
    d.X = gen_design(n, p, 0.0, seed);
    d.y.resize(n);
    Rng rng(derive_seed(seed, 99));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) d.y[i] = gauss(rng);
    d.task = Task::Regression;
    return d;
}

/// Reference logistic marginal fit by brute grid + golden-section refinement
/// over (w0, w). Deliberately slow and solver-free.
double oracle_logistic_coef(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    auto nll = [&](double w0, double w) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double m = y[i] * (w0 + w * x[i]);
            total += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
        }
        return total;
    };
    double best_w0 = 0.0, best_w = 0.0, best = nll(0.0, 0.0);
    double lo0 = -5.0, hi0 = 5.0, lo1 = -5.0, hi1 = 5.0;
    for (int round = 0; round < 12; ++round) {
        const int grid = 21;
        for (int a = 0; a < grid; ++a) {
            for (int b = 0; b < grid; ++b) {
                const double w0 = lo0 + (hi0 - lo0) * a / (grid - 1);
                const double w = lo1 + (hi1 - lo1) * b / (grid - 1);
                const double v = nll(w0, w);
                if (v < best) {
                    best = v;
                    best_w0 = w0;
                    best_w = w;
                }
            }
        }
        const double span0 = (hi0 - lo0) / (grid - 1) * 2.0;
        const double span1 = (hi1 - lo1) / (grid - 1) * 2.0;
        lo0 = best_w0 - span0;
        hi0 = best_w0 + span0;
        lo1 = best_w - span1;
        hi1 = best_w + span1;
    }
    return best_w;
}

}  // namespace

TEST_CASE("squared-loss utility is 1 for an exact copy of the response") {
    Dataset d = gaussian_regression(50, 3, 1);
    d.X.col(1) = d.y;
    d.X.col(2) = -2.0 * d.y;
    const MarginalUtilities u = marginal_utilities(d, LossKind::Squared);
    CHECK(u.s[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.s[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.s[0] < 0.5);
}

TEST_CASE("squared-loss utility is invariant to affine column changes") {
    Dataset d = gaussian_regression(80, 2, 2);
    d.X.col(1) = 3.0 * d.X.col(0) - Eigen::VectorXd::Constant(80, 7.0);
    const MarginalUtilities u = marginal_utilities(d, LossKind::Squared);
    CHECK(u.s[0] == doctest::Approx(u.s[1]).epsilon(1e-12));
}

TEST_CASE("standardized least squares coefficient equals the utility") {
    // on standardized data the univariate slope is the correlation itself
    auto [d, truth] = gen_linear(200, 6, 3, 0.3, 2.0, 5);
    auto [sd, stats] = standardize(d);
    const MarginalUtilities u = marginal_utilities(sd, LossKind::Squared);
    for (Eigen::Index j = 0; j < sd.p(); ++j) {
        const double slope = sd.X.col(j).dot(sd.y) / static_cast<double>(sd.n());
        CHECK(u.s[j] == doctest::Approx(std::abs(slope)).epsilon(1e-10));
    }
}

TEST_CASE("logistic utilities match a grid-search oracle") {
    Rng rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 120;
    Dataset d;
    d.task = Task::BinaryClassification;
    d.X.resize(n, 3);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) d.X(i, j) = gauss(rng);
        const double margin = 0.8 * d.X(i, 0) - 0.3 * d.X(i, 1) + 0.5 * gauss(rng);
        d.y[i] = margin >= 0 ? 1.0 : -1.0;
    }
    const MarginalUtilities u = marginal_utilities(d, LossKind::Logistic);
    CHECK(u.newton_failures == 0);
    for (int j = 0; j < 3; ++j) {
        const double oracle = std::abs(oracle_logistic_coef(d.X.col(j), d.y));
        CHECK(u.s[j] == doctest::Approx(oracle).epsilon(1e-4));
    }
    CHECK(u.s[0] > u.s[1]);
    CHECK(u.s[0] > u.s[2]);
}

TEST_CASE("perfectly separating column hits the utility cap") {
    const int n = 40;
    Dataset d;
    d.task = Task::BinaryClassification;
    d.X.resize(n, 2);
    d.y.resize(n);
    Rng rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        d.y[i] = i < n / 2 ? -1.0 : 1.0;
        d.X(i, 0) = d.y[i] * (1.0 + 0.1 * std::abs(gauss(rng)));  // separates exactly
        d.X(i, 1) = gauss(rng);
    }
    const MarginalUtilities u = marginal_utilities(d, LossKind::Logistic);
    CHECK(u.newton_failures >= 1);
    CHECK(u.s[0] == 1e6);
    CHECK(u.s[1] < 10.0);
}

TEST_CASE("screen agrees with a full sort at ten thousand features") {
    Dataset d = gaussian_regression(40, 10000, 11);
    const double alpha = 0.013;
    auto [kept, u] = screen(d, alpha);
    const int expect = static_cast<int>(std::ceil(alpha * 10000));
    REQUIRE(static_cast<int>(kept.size()) == expect);

    std::vector<int> order(10000);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return u.s[a] > u.s[b]; });
    order.resize(static_cast<std::size_t>(expect));
    std::sort(order.begin(), order.end());
    CHECK(kept == order);
}

TEST_CASE("ties keep the lower index") {
    Eigen::VectorXd s(5);
    s << 0.5, 0.9, 0.9, 0.9, 0.1;
    CHECK(top_by_utility(s, 2) == std::vector<int>{1, 2});
    CHECK(top_by_utility(s, 4) == std::vector<int>{0, 1, 2, 3});
    CHECK(top_by_utility(s, 0).empty());
    CHECK(top_by_utility(s, 9) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("smaller alpha yields a nested subset") {
    Dataset d = gaussian_regression(60, 500, 13);
    auto [small, u1] = screen(d, 0.05);
    auto [large, u2] = screen(d, 0.2);
    CHECK(small.size() == 25);
    CHECK(large.size() == 100);
    CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
}

TEST_CASE("screen rejects alpha outside (0, 1]") {
    Dataset d = gaussian_regression(10, 5, 17);
    CHECK_THROWS_AS(screen(d, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(screen(d, 1.5), std::invalid_argument);
    auto [kept, u] = screen(d, 1.0);
    CHECK(kept.size() == 5);
}

TEST_CASE("planted features survive screening at moderate ratios") {
    int survived = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto [d, truth] = gen_linear(100, 1000, 5, 0.0, 4.0, seed);
        auto [sd, stats] = standardize(d);
        auto [kept, u] = screen(sd, 0.1);
        const std::set<int> keep_set(kept.begin(), kept.end());
        for (int j : truth.support) {
            ++total;
            if (keep_set.count(j)) ++survived;
        }
    }
    // marginal screening at alpha=0.1 should rarely drop a planted feature here
    CHECK(static_cast<double>(survived) / total > 0.9);
}

TEST_CASE("default screening fraction targets ten n columns") {
    CHECK(default_alpha(500, 2000) == doctest::Approx(1.0));
    CHECK(default_alpha(500, 100000) == doctest::Approx(0.05));
    CHECK(default_alpha(10, 50) == doctest::Approx(1.0));
}
