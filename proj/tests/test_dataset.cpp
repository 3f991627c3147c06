#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "bb/dataset.hpp"
#include "bb/errors.hpp"
#include "bb/rng.hpp"

using namespace bb;

namespace {

Dataset small_regression() {
    Dataset d;
    d.X.resize(4, 2);
    d.X << 1.0, 4.0, 2.0, 2.0, 3.0, 8.0, 4.0, 6.0;
    d.y.resize(4);
    d.y << 1.0, 2.0, 3.0, 4.0;
    d.task = Task::Regression;
    return d;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/bb_test_") + name;
}

}  // namespace

TEST_CASE("standardize centers and scales every column") {
    auto [sd, stats] = standardize(small_regression());
    for (Eigen::Index j = 0; j < sd.p(); ++j) {
        CHECK(std::abs(sd.X.col(j).mean()) < 1e-10);
        const double var = sd.X.col(j).array().square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(sd.y.mean()) < 1e-10);
}

TEST_CASE("standardize two-point column uses the population deviation") {
    Dataset d;
    d.X.resize(2, 1);
    d.X << 1.0, 3.0;
    d.y.resize(2);
    d.y << 0.0, 1.0;
    auto [sd, stats] = standardize(d);
    CHECK(sd.X(0, 0) == doctest::Approx(-1.0));
    CHECK(sd.X(1, 0) == doctest::Approx(1.0));
    CHECK(stats.means[0] == doctest::Approx(2.0));
    CHECK(stats.scales[0] == doctest::Approx(1.0));
}

TEST_CASE("standardize is idempotent") {
    auto [sd, stats] = standardize(small_regression());
    auto [sd2, stats2] = standardize(sd);
    CHECK((sd2.X - sd.X).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(stats2.means.cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index j = 0; j < sd.p(); ++j)
        CHECK(stats2.scales[j] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constant column raises ZeroVarianceColumn") {
    Dataset d = small_regression();
    d.X.col(1).setConstant(5.0);
    CHECK_THROWS_AS(standardize(d), ZeroVarianceColumn);
}

TEST_CASE("classification standardization leaves labels untouched") {
    Dataset d = small_regression();
    d.task = Task::BinaryClassification;
    d.y << -1, 1, -1, 1;
    auto [sd, stats] = standardize(d);
    CHECK(sd.y == d.y);
    CHECK(stats.response_mean == 0.0);
    CHECK(stats.response_scale == 1.0);
}

TEST_CASE("stats invert standardized predictions exactly") {
    const Dataset d = small_regression();
    auto [sd, stats] = standardize(d);
    // the standardized response itself must map back to the original
    const Eigen::VectorXd back = unstandardize_response(sd.y, stats);
    CHECK((back - d.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("csv round trip preserves values") {
    const std::string path = temp_path("roundtrip.csv");
    const Dataset d = small_regression();
    write_csv(path, d);
    const Dataset loaded = load_csv(path, "y", Task::Regression);
    REQUIRE(loaded.n() == d.n());
    REQUIRE(loaded.p() == d.p());
    CHECK((loaded.X - d.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((loaded.y - d.y).cwiseAbs().maxCoeff() < 1e-12);
    std::remove(path.c_str());
}

TEST_CASE("load_csv takes the response out of the column order") {
    const std::string path = temp_path("basic.csv");
    {
        std::ofstream out(path);
        out << "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";
    }
    const Dataset d = load_csv(path, "y", Task::Regression);
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.X(1, 1) == doctest::Approx(5.0));
    CHECK(d.y[2] == doctest::Approx(9.0));
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    std::remove(path.c_str());
}

TEST_CASE("load_csv reports the position of a bad cell") {
    const std::string path = temp_path("bad.csv");
    {
        std::ofstream out(path);
        out << "a,y\n1,2\nfoo,4\n";
    }
    try {
        load_csv(path, "y", Task::Regression);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row == 2);
        CHECK(e.col == 0);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_csv flags missing cells") {
    const std::string path = temp_path("missing.csv");
    {
        std::ofstream out(path);
        out << "a,y\n1,2\n,4\n";
    }
    CHECK_THROWS_AS(load_csv(path, "y", Task::Regression), MissingValue);
    std::remove(path.c_str());
}

TEST_CASE("holdout split sizes and determinism") {
    Dataset d = small_regression();
    d.X.resize(10, 1);
    d.X.col(0).setLinSpaced(10, 0, 9);
    d.y.resize(10);
    d.y.setLinSpaced(10, 0, 9);
    const SplitIndices s1 = holdout_split(d, 0.7, 42);
    const SplitIndices s2 = holdout_split(d, 0.7, 42);
    CHECK(s1.train.size() == 7);
    CHECK(s1.validation.size() == 3);
    CHECK(s1.train == s2.train);
    CHECK(s1.validation == s2.validation);

    std::vector<int> all = s1.train;
    all.insert(all.end(), s1.validation.begin(), s1.validation.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("holdout split is uniform across seeds") {
    Dataset d;
    d.X.resize(10, 1);
    d.X.col(0).setLinSpaced(10, 0, 9);
    d.y.resize(10);
    d.y.setZero();
    std::vector<int> train_count(10, 0);
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) {
        const SplitIndices split = holdout_split(d, 0.7, static_cast<std::uint64_t>(s));
        for (int i : split.train) ++train_count[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < 10; ++i) {
        const double freq = static_cast<double>(train_count[static_cast<std::size_t>(i)]) / trials;
        CHECK(freq == doctest::Approx(0.7).epsilon(0.03));
    }
}

TEST_CASE("permute_expand with zero copies is the identity") {
    const Dataset d = small_regression();
    auto [expanded, mask] = permute_expand(d, 0, 7);
    CHECK(expanded.p() == d.p());
    CHECK((expanded.X - d.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::count(mask.begin(), mask.end(), true) == static_cast<long>(d.p()));
}

TEST_CASE("permute_expand sizes, mask, and per-column multisets") {
    const Dataset d = small_regression();
    auto [expanded, mask] = permute_expand(d, 3, 7);
    CHECK(expanded.p() == 8);
    CHECK(std::count(mask.begin(), mask.end(), true) == 2);
    CHECK(mask[0]);
    CHECK(mask[1]);
    for (Eigen::Index j = d.p(); j < expanded.p(); ++j) {
        const Eigen::Index src = (j - d.p()) % d.p();
        std::vector<double> a(expanded.X.col(j).data(), expanded.X.col(j).data() + d.n());
        std::vector<double> b(d.X.col(src).data(), d.X.col(src).data() + d.n());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("permutation destroys column-response alignment") {
    const int n = 400;
    Dataset d;
    d.X.resize(n, 2);
    d.y.resize(n);
    Rng rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        d.X(i, 0) = normal(rng);
        d.X(i, 1) = 0.5 * d.X(i, 0) + normal(rng);
        d.y[i] = d.X(i, 0);  // response equals the first column
    }
    auto [expanded, mask] = permute_expand(d, 20, 3);
    double mean_abs_cor = 0.0;
    int appended = 0;
    const double ym = expanded.y.mean();
    const Eigen::ArrayXd cy = expanded.y.array() - ym;
    const double sy = std::sqrt(cy.square().mean());
    for (Eigen::Index j = d.p(); j < expanded.p(); ++j) {
        const Eigen::ArrayXd cx = expanded.X.col(j).array() - expanded.X.col(j).mean();
        const double sx = std::sqrt(cx.square().mean());
        mean_abs_cor += std::abs((cx * cy).mean() / (sx * sy));
        ++appended;
    }
    mean_abs_cor /= appended;
    CHECK(mean_abs_cor < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("dataset validation rejects malformed labels") {
    Dataset d = small_regression();
    d.task = Task::BinaryClassification;
    d.y << -1, 1, 0.5, 1;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("select_features and select_rows subset consistently") {
    const Dataset d = small_regression();
    const Dataset cols = d.select_features({1});
    CHECK(cols.p() == 1);
    CHECK(cols.X(2, 0) == doctest::Approx(8.0));
    const Dataset rows = d.select_rows({0, 3});
    CHECK(rows.n() == 2);
    CHECK(rows.y[1] == doctest::Approx(4.0));
    CHECK(rows.X(1, 1) == doctest::Approx(6.0));
}
