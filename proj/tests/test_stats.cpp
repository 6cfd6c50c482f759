#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

using namespace lobsig;

TEST_CASE("chi-squared CDF matches reference values") {
    // references from an independent statistics library
    CHECK(chi2_cdf(3.0, 2) == doctest::Approx(0.7768698398515702).epsilon(1e-12));
    CHECK(chi2_cdf(5.0, 3) == doctest::Approx(0.8282028557032665).epsilon(1e-12));
    CHECK(chi2_cdf(0.0, 4) == 0.0);
    CHECK(chi2_cdf(-1.0, 4) == 0.0);
    // closed form for k = 2: 1 - exp(-x/2)
    CHECK(chi2_cdf(3.0, 2) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-14));
}

TEST_CASE("chi-squared quantile matches reference values and inverts the CDF") {
    CHECK(chi2_quantile(0.9, 5) == doctest::Approx(9.236356899781123).epsilon(1e-9));
    CHECK(chi2_quantile(0.975, 2) == doctest::Approx(7.377758908227871).epsilon(1e-9));
    CHECK(chi2_quantile(0.975, 11) == doctest::Approx(21.9200492610212).epsilon(1e-9));
    for (double prob : {0.01, 0.3, 0.5, 0.95, 0.999})
        for (int k : {1, 2, 7, 20})
            CHECK(chi2_cdf(chi2_quantile(prob, k), k) == doctest::Approx(prob).epsilon(1e-9));
    CHECK(std::isinf(chi2_quantile(1.0, 3)));
    CHECK(chi2_quantile(0.0, 3) == 0.0);
    CHECK_THROWS_AS(chi2_quantile(-0.1, 3), ConfigError);
}

TEST_CASE("linear-interpolation percentile") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);  // 1..100
    CHECK(percentile_linear(v, 0.95) == doctest::Approx(95.05).epsilon(1e-14));
    CHECK(percentile_linear(v, 0.0) == 1.0);
    CHECK(percentile_linear(v, 1.0) == 100.0);

    std::vector<double> w{1.0, 1.0, 8.0, 12.0};
    CHECK(percentile_linear(w, 0.95) == doctest::Approx(11.4).epsilon(1e-12));
    std::vector<double> single{3.5};
    CHECK(percentile_linear(single, 0.7) == 3.5);
    CHECK_THROWS_AS(percentile_linear({}, 0.5), ConfigError);
    CHECK_THROWS_AS(percentile_linear(w, 1.5), ConfigError);
}

TEST_CASE("nearest-rank percentile picks the ceil(qn)-th smallest") {
    std::vector<double> v{10.0, 20.0, 30.0};
    CHECK(percentile_nearest_rank(v, 0.5) == 20.0);   // ceil(1.5) = 2nd
    CHECK(percentile_nearest_rank(v, 0.34) == 20.0);  // ceil(1.02) = 2nd
    CHECK(percentile_nearest_rank(v, 0.99) == 30.0);
    CHECK(percentile_nearest_rank(v, 0.0) == 10.0);  // rank floor is 1
}

TEST_CASE("MCD consistency factor matches reference values") {
    CHECK(mcd_consistency_factor(25.0 / 30.0, 2) ==
          doctest::Approx(1.5584866384057978).epsilon(1e-9));
    CHECK(mcd_consistency_factor(0.95, 11) == doctest::Approx(1.0598088486310635).epsilon(1e-9));
    CHECK(mcd_consistency_factor(0.95, 2) == doctest::Approx(1.1871833391417055).epsilon(1e-9));
    CHECK(mcd_consistency_factor(1.0, 5) == 1.0);
    CHECK(mcd_consistency_factor(1.3, 5) == 1.0);
}

TEST_CASE("canonical order sorts rows lexicographically with index tie-break") {
    Eigen::MatrixXd X = testutil::make_mat(5, 2,
                                           {2.0, 1.0,   // 0
                                            1.0, 5.0,   // 1
                                            1.0, 3.0,   // 2
                                            2.0, 1.0,   // 3 (duplicate of 0)
                                            0.5, 9.0}); // 4
    const auto order = canonical_order(X);
    CHECK(order == std::vector<int>{4, 2, 1, 0, 3});
    const auto rank = canonical_rank(X);
    CHECK(rank == std::vector<int>{3, 2, 1, 4, 0});
}

TEST_CASE("canonical order is inverse-consistent under permutation") {
    Eigen::MatrixXd X = testutil::gauss(40, 3, 99);
    const auto perm = testutil::random_perm(40, 7);
    Eigen::MatrixXd Xp = testutil::apply_perm(X, perm);
    const auto o0 = canonical_order(X);
    const auto o1 = canonical_order(Xp);
    // same content visited in the same order
    for (std::size_t i = 0; i < o0.size(); ++i)
        CHECK(Xp.row(o1[i]) == X.row(o0[i]));
}

TEST_CASE("mean_cov_rows uses the population divisor") {
    Eigen::MatrixXd X = testutil::make_mat(4, 2, {0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0});
    std::vector<int> rows{0, 1, 2, 3};
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    mean_cov_rows(X, rows, mean, cov);
    CHECK(mean(0) == doctest::Approx(1.0));
    CHECK(mean(1) == doctest::Approx(1.0));
    CHECK(cov(0, 0) == doctest::Approx(1.0));  // sum of squares 4 over n=4
    CHECK(cov(1, 1) == doctest::Approx(1.0));
    CHECK(cov(0, 1) == doctest::Approx(0.0));

    std::vector<int> subset{0, 1};
    mean_cov_rows(X, subset, mean, cov);
    CHECK(mean(0) == doctest::Approx(1.0));
    CHECK(cov(0, 0) == doctest::Approx(1.0));
    CHECK(cov(1, 1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(mean_cov_rows(X, std::vector<int>{}, mean, cov), ConfigError);
}

TEST_CASE("parallel_for covers the index range exactly once") {
    std::vector<int> hits(2000, 0);
    parallel_for(2000, [&](int b, int e) {
        for (int i = b; i < e; ++i) ++hits[static_cast<std::size_t>(i)];
    });
    for (int h : hits) CHECK(h == 1);
}
