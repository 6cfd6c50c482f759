#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "naive.hpp"
#include "lobsig/detectors/detector.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

using namespace lobsig;

namespace {

DetectorSpec spec_of(DetectorKind kind, std::uint64_t seed = 0) {
    return DetectorSpec::defaults(kind, seed);
}

Eigen::MatrixXd column(const std::vector<double>& v) {
    return testutil::make_mat(static_cast<int>(v.size()), 1, v);
}

}  // namespace

// ---------------------------------------------------------------- DBSCAN

TEST_CASE("DBSCAN isolates the far end of a line") {
    // minPts-distances are [1,1,1,8]; eps lands at their 0.9 quantile 5.9,
    // so 0,1,2 are core and 10 is noise at distance 8
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    std::get<DbscanParams>(spec.params).min_pts = 2;
    const auto s = score_dbscan(matrix_only(column({0.0, 1.0, 2.0, 10.0})), spec);

    CHECK(s.fit_metadata.at("eps") == doctest::Approx(5.9).epsilon(1e-12));
    CHECK(s.fit_metadata.at("core_count") == 3.0);
    CHECK(s.raw_scores[0] == 0.0);
    CHECK(s.raw_scores[1] == 0.0);
    CHECK(s.raw_scores[2] == 0.0);
    CHECK(s.raw_scores[3] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(*s.native_labels == std::vector<std::uint8_t>{0, 0, 0, 1});
}

TEST_CASE("DBSCAN honours an explicit eps") {
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    auto& p = std::get<DbscanParams>(spec.params);
    p.min_pts = 2;
    p.eps = 2.0;
    const auto s = score_dbscan(matrix_only(column({0.0, 1.0, 2.0, 10.0})), spec);
    CHECK(s.fit_metadata.at("eps") == 2.0);
    CHECK(s.raw_scores[3] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK((*s.native_labels)[3] == 1);
}

TEST_CASE("DBSCAN matches the brute-force reference on random data") {
    const Eigen::MatrixXd X = testutil::gauss(200, 3, 83);
    const auto s = score_dbscan(matrix_only(X), spec_of(DetectorKind::DBSCAN));
    CHECK(s.fit_metadata.at("min_pts") == 6.0);  // defaults to 2p
    const auto ref = naive::dbscan(X, 6);
    CHECK(s.fit_metadata.at("eps") == doctest::Approx(ref.eps).epsilon(1e-12));
    for (std::size_t i = 0; i < ref.scores.size(); ++i) {
        CHECK(s.raw_scores[i] == doctest::Approx(ref.scores[i]).epsilon(1e-8));
        CHECK((*s.native_labels)[i] == ref.labels[i]);
    }
}

TEST_CASE("a generous eps makes every row core") {
    const Eigen::MatrixXd X = testutil::gauss(50, 2, 89);
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    std::get<DbscanParams>(spec.params).eps = 100.0;
    const auto s = score_dbscan(matrix_only(X), spec);
    CHECK(s.fit_metadata.at("core_count") == 50.0);
    for (double v : s.raw_scores) CHECK(v == 0.0);
    for (auto l : *s.native_labels) CHECK(l == 0);
}

TEST_CASE("with no core rows anywhere, scores fall back to nearest-neighbor distance") {
    const Eigen::MatrixXd X = testutil::gauss(40, 2, 97);
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    auto& p = std::get<DbscanParams>(spec.params);
    p.min_pts = 2;
    p.eps = 1e-12;
    const auto s = score_dbscan(matrix_only(X), spec);
    CHECK(s.fit_metadata.at("core_count") == 0.0);
    const auto ref = naive::dbscan(X, 2, 1e-12);
    for (std::size_t i = 0; i < ref.scores.size(); ++i) {
        CHECK(s.raw_scores[i] == doctest::Approx(ref.scores[i]).epsilon(1e-8));
        CHECK((*s.native_labels)[i] == 1);  // everything is noise
    }
}

TEST_CASE("minPts of 1 makes everything core") {
    const Eigen::MatrixXd X = testutil::gauss(30, 2, 101);
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    std::get<DbscanParams>(spec.params).min_pts = 1;
    const auto s = score_dbscan(matrix_only(X), spec);
    for (double v : s.raw_scores) CHECK(v == 0.0);
}

TEST_CASE("DBSCAN validates its parameters") {
    const Eigen::MatrixXd X = testutil::gauss(20, 2, 103);
    DetectorSpec spec = spec_of(DetectorKind::DBSCAN);
    SUBCASE("minPts at the row count") {
        std::get<DbscanParams>(spec.params).min_pts = 20;
        CHECK_THROWS_AS(score_dbscan(matrix_only(X), spec), ConfigError);
    }
    SUBCASE("negative minPts") {
        std::get<DbscanParams>(spec.params).min_pts = -3;
        CHECK_THROWS_AS(score_dbscan(matrix_only(X), spec), ConfigError);
    }
    SUBCASE("negative eps") {
        std::get<DbscanParams>(spec.params).eps = -1.0;
        CHECK_THROWS_AS(score_dbscan(matrix_only(X), spec), ConfigError);
    }
}

// ---------------------------------------------------------------- OPTICS

TEST_CASE("OPTICS reachability on a line matches the hand walk") {
    // walk order 0 -> 1 -> 2 -> 10; reach [undef, 1, 1, 8]; the start gets
    // 1.5x the largest finite reachability
    DetectorSpec spec = spec_of(DetectorKind::OPTICS);
    std::get<OpticsParams>(spec.params).min_pts = 2;
    const auto s = score_optics(matrix_only(column({0.0, 1.0, 2.0, 10.0})), spec);

    CHECK(s.raw_scores[0] == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(s.raw_scores[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.raw_scores[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.raw_scores[3] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(s.fit_metadata.at("max_finite_reach") == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(s.fit_metadata.at("undefined_count") == 1.0);
    // the 0.95 score quantile is 11.4, so only the sentinel start is flagged
    CHECK(*s.native_labels == std::vector<std::uint8_t>{1, 0, 0, 0});
}

TEST_CASE("OPTICS matches the brute-force reference on random data") {
    const Eigen::MatrixXd X = testutil::gauss(150, 3, 107);
    const auto s = score_optics(matrix_only(X), spec_of(DetectorKind::OPTICS));
    CHECK(s.fit_metadata.at("min_pts") == 6.0);
    const auto ref = naive::optics(X, 6);
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(s.raw_scores[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("reachability on a uniform grid never exceeds the diagonal pitch") {
    Eigen::MatrixXd X(100, 2);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) X.row(i * 10 + j) = Eigen::RowVector2d(i, j);
    DetectorSpec spec = spec_of(DetectorKind::OPTICS);
    std::get<OpticsParams>(spec.params).min_pts = 4;
    const auto s = score_optics(matrix_only(X), spec);

    CHECK(s.fit_metadata.at("undefined_count") == 1.0);
    const int start = canonical_order(X)[0];
    for (int i = 0; i < 100; ++i) {
        if (i == start) continue;  // sentinel value, not a reachability
        CHECK(s.raw_scores[static_cast<std::size_t>(i)] <= std::sqrt(2.0) + 1e-12);
    }
}

TEST_CASE("an isolated point carries the largest finite reachability") {
    Eigen::MatrixXd X = testutil::gauss(80, 2, 109);
    X.row(33) = Eigen::RowVector2d(25.0, -25.0);
    DetectorSpec spec = spec_of(DetectorKind::OPTICS, 1);
    const auto s = score_optics(matrix_only(X), spec);
    CHECK(s.raw_scores[33] == doctest::Approx(s.fit_metadata.at("max_finite_reach")).epsilon(1e-12));
    CHECK((*s.native_labels)[33] == 1);
}

TEST_CASE("OPTICS validates its parameters") {
    const Eigen::MatrixXd X = testutil::gauss(20, 2, 113);
    DetectorSpec spec = spec_of(DetectorKind::OPTICS);
    SUBCASE("minPts at the row count") {
        std::get<OpticsParams>(spec.params).min_pts = 25;
        CHECK_THROWS_AS(score_optics(matrix_only(X), spec), ConfigError);
    }
    SUBCASE("label quantile out of range") {
        std::get<OpticsParams>(spec.params).label_quantile = 0.0;
        CHECK_THROWS_AS(score_optics(matrix_only(X), spec), ConfigError);
        std::get<OpticsParams>(spec.params).label_quantile = 1.2;
        CHECK_THROWS_AS(score_optics(matrix_only(X), spec), ConfigError);
    }
}
