#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lobsig/detectors/detector.hpp"
#include "lobsig/errors.hpp"

using namespace lobsig;

namespace {

// Tie-free Gaussian cloud with one gross outlier; specs tweaked so every
// detector family can place that outlier at (or next to) the top:
//  - K-Means runs with one cluster, because with k > 1 the farthest-point
//    seeding hands the outlier its own centroid and a score of zero;
//  - SOD runs with a variance fraction that admits every axis, reducing it
//    to a full-space distance (the subspace case has its own test).
constexpr int kOutlierRow = 40;

Eigen::MatrixXd outlier_fixture() {
    Eigen::MatrixXd X = testutil::gauss(160, 3, 211);
    X.row(kOutlierRow) = Eigen::RowVector3d(15.0, 15.0, 15.0);
    return X;
}

DetectorSpec orientation_spec(DetectorKind kind) {
    DetectorSpec spec = DetectorSpec::defaults(kind, 1);
    if (kind == DetectorKind::KMEANS) std::get<KmeansParams>(spec.params).n_clusters = 1;
    if (kind == DetectorKind::SOD) std::get<SodParams>(spec.params).variance_frac = 3.0;
    return spec;
}

}  // namespace

TEST_CASE("higher always means more anomalous: the planted outlier tops every detector") {
    const Eigen::MatrixXd X = outlier_fixture();
    const FeatureMatrix fm = matrix_only(X);

    for (DetectorKind kind : kAllDetectorKinds) {
        CAPTURE(to_string(kind));
        const ScoreVector s = score(fm, orientation_spec(kind));
        REQUIRE(s.raw_scores.size() == 160);

        int above = 0;
        for (std::size_t i = 0; i < s.raw_scores.size(); ++i)
            if (s.raw_scores[i] > s.raw_scores[kOutlierRow]) ++above;
        if (kind == DetectorKind::OPTICS) {
            // the walk's start row carries a sentinel of 1.5x the largest
            // finite reachability, which is the outlier's own value
            CHECK(above <= 1);
            CHECK(s.raw_scores[kOutlierRow] ==
                  doctest::Approx(s.fit_metadata.at("max_finite_reach")).epsilon(1e-12));
        } else {
            CHECK(above == 0);
        }
    }
}

TEST_CASE("every detector flags the planted outlier in its native labels") {
    const Eigen::MatrixXd X = outlier_fixture();
    const FeatureMatrix fm = matrix_only(X);
    for (DetectorKind kind : kAllDetectorKinds) {
        CAPTURE(to_string(kind));
        const ScoreVector s = score(fm, orientation_spec(kind));
        REQUIRE(s.native_labels.has_value());
        REQUIRE(s.native_labels->size() == 160);
        CHECK((*s.native_labels)[kOutlierRow] == 1);
    }
}

TEST_CASE("scoring the same matrix twice is bit-identical") {
    const Eigen::MatrixXd X = testutil::gauss(130, 3, 223);
    const FeatureMatrix fm = matrix_only(X);
    for (DetectorKind kind : kAllDetectorKinds) {
        CAPTURE(to_string(kind));
        const DetectorSpec spec = DetectorSpec::defaults(kind, 77);
        const ScoreVector a = score(fm, spec);
        const ScoreVector b = score(fm, spec);
        CHECK(a.raw_scores == b.raw_scores);
        CHECK(a.native_labels == b.native_labels);
        CHECK(a.fit_metadata == b.fit_metadata);
    }
}

TEST_CASE("permuting the rows permutes the scores and nothing else") {
    const Eigen::MatrixXd X = testutil::gauss(140, 3, 227);
    const std::vector<int> perm = testutil::random_perm(140, 99);
    const Eigen::MatrixXd Xp = testutil::apply_perm(X, perm);
    const FeatureMatrix fm = matrix_only(X);
    const FeatureMatrix fmp = matrix_only(Xp);

    for (DetectorKind kind : kAllDetectorKinds) {
        CAPTURE(to_string(kind));
        const DetectorSpec spec = DetectorSpec::defaults(kind, 5);
        const ScoreVector s0 = score(fm, spec);
        const ScoreVector sp = score(fmp, spec);

        for (std::size_t i = 0; i < perm.size(); ++i) {
            // bitwise equality, not approximate: set-level reductions walk
            // rows in content order, so the arithmetic is identical
            CHECK(sp.raw_scores[i] == s0.raw_scores[static_cast<std::size_t>(perm[i])]);
            CHECK((*sp.native_labels)[i] ==
                  (*s0.native_labels)[static_cast<std::size_t>(perm[i])]);
        }
        CHECK(sp.fit_metadata == s0.fit_metadata);
    }
}

TEST_CASE("one bad spec cannot sink the batch") {
    const Eigen::MatrixXd X = testutil::gauss(50, 2, 229);
    std::vector<DetectorSpec> specs{DetectorSpec::defaults(DetectorKind::EC),
                                    DetectorSpec::defaults(DetectorKind::KNN),
                                    DetectorSpec::defaults(DetectorKind::HBOS)};
    std::get<KnnParams>(specs[1].params).k = 0;  // invalid

    const auto outcomes = run_all_detectors(matrix_only(X), specs);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].ok());
    CHECK_FALSE(outcomes[1].ok());
    CHECK(outcomes[1].error.find("at least 1") != std::string::npos);
    CHECK(outcomes[2].ok());
    for (const auto& o : outcomes)
        if (o.ok()) CHECK(o.result->fit_metadata.count("wall_ms") == 1);
}

TEST_CASE("an empty matrix is rejected up front") {
    Eigen::MatrixXd empty(0, 3);
    CHECK_THROWS_AS(score(matrix_only(empty), DetectorSpec::defaults(DetectorKind::EC)),
                    ValidationError);
}

TEST_CASE("detector names round-trip through parsing") {
    for (DetectorKind kind : kAllDetectorKinds) {
        const auto parsed = detector_kind_from_string(to_string(kind));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == kind);
    }
    CHECK(detector_kind_from_string("isof") == DetectorKind::ISOF);
    CHECK(detector_kind_from_string("isoforest") == DetectorKind::ISOF);
    CHECK_FALSE(detector_kind_from_string("svm").has_value());
    CHECK_FALSE(detector_kind_from_string("").has_value());
    CHECK_FALSE(detector_kind_from_string("KNN").has_value());  // names are lower-case
}

TEST_CASE("the default spec batch covers all thirteen kinds with distinct seeds") {
    const auto specs = default_specs(42);
    REQUIRE(specs.size() == 13);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        CHECK(specs[i].kind == kAllDetectorKinds[i]);
        seeds.push_back(specs[i].seed);
    }
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}
