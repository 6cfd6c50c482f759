#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "lobsig/detectors/detector.hpp"
#include "lobsig/detectors/ocsvm.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

using namespace lobsig;

namespace {

DetectorSpec spec_of(DetectorKind kind, std::uint64_t seed = 0) {
    return DetectorSpec::defaults(kind, seed);
}

}  // namespace

TEST_CASE("the dual objective matches an external QP solution on a tiny problem") {
    const Eigen::MatrixXd X = testutil::make_mat(
        6, 2, {0.0, 0.0, 0.2, 0.1, -0.1, 0.2, 0.1, -0.2, 3.0, 3.0, -2.5, 2.8});
    OcsvmParams params;
    params.nu = 0.5;
    params.gamma = 1.0;
    params.tol = 1e-9;  // tighten so the duality gap is far below the check
    const OcsvmModel model = solve_ocsvm(X, params);

    // reference: minimize (1/2) a^T K a subject to 0 <= a_i <= 1/(nu n),
    // sum a_i = 1, solved independently with a constrained QP solver
    CHECK(std::abs(model.objective - 0.1612948662529613) <= 1e-6);

    // the coefficients it found must satisfy the box and simplex constraints
    double total = 0.0;
    const double C = 1.0 / (params.nu * 6);
    for (double a : model.alpha) {
        CHECK(a >= 0.0);
        CHECK(a <= C + 1e-12);
        total += a;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("every converged fit respects the nu bounds") {
    // violations stay below nu*n while at least ceil(nu*n) rows stay support
    const int n = 400;
    OcsvmParams params;
    params.nu = 0.1;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Eigen::MatrixXd X = testutil::gauss(n, 3, seed * 1000 + 7);
        const OcsvmModel model = solve_ocsvm(X, params);
        CHECK(model.margin_violations <= static_cast<int>(params.nu * n));
        CHECK(model.support_count >= static_cast<int>(std::ceil(params.nu * n)));
    }
}

TEST_CASE("a far point sits outside the learned boundary") {
    Eigen::MatrixXd X = testutil::gauss(60, 2, 127);
    X *= 0.1;
    X.row(17) = Eigen::RowVector2d(5.0, 5.0);
    DetectorSpec spec = spec_of(DetectorKind::OCSVM);
    std::get<OcsvmParams>(spec.params).nu = 0.2;
    const auto s = score_ocsvm(matrix_only(X), spec);

    const auto top = std::max_element(s.raw_scores.begin(), s.raw_scores.end());
    CHECK(top - s.raw_scores.begin() == 17);
    CHECK(*top > 0.0);  // negative decision value: outside the boundary
    CHECK((*s.native_labels)[17] == 1);
    const auto flagged =
        std::count(s.native_labels->begin(), s.native_labels->end(), std::uint8_t{1});
    CHECK(flagged <= 60 / 5 + 1);  // roughly the nu fraction, never the bulk
}

TEST_CASE("the default bandwidth is one over dimension times total variance") {
    const Eigen::MatrixXd X = testutil::gauss(100, 4, 131, {1.0, 2.0, 0.5, 1.5});
    const auto s = score_ocsvm(matrix_only(X), spec_of(DetectorKind::OCSVM));

    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::vector<int> all(100);
    std::iota(all.begin(), all.end(), 0);
    mean_cov_rows(X, all, mean, cov);
    CHECK(s.fit_metadata.at("gamma") == doctest::Approx(1.0 / (4.0 * cov.trace())).epsilon(1e-12));
}

TEST_CASE("an explicit bandwidth is used verbatim") {
    const Eigen::MatrixXd X = testutil::gauss(50, 2, 137);
    DetectorSpec spec = spec_of(DetectorKind::OCSVM);
    std::get<OcsvmParams>(spec.params).gamma = 0.37;
    const auto s = score_ocsvm(matrix_only(X), spec);
    CHECK(s.fit_metadata.at("gamma") == 0.37);
}

TEST_CASE("OC-SVM validates its parameters") {
    const Eigen::MatrixXd X = testutil::gauss(30, 2, 139);
    OcsvmParams params;
    SUBCASE("nu above 1") {
        params.nu = 1.5;
        CHECK_THROWS_AS(solve_ocsvm(X, params), ConfigError);
    }
    SUBCASE("nu zero") {
        params.nu = 0.0;
        CHECK_THROWS_AS(solve_ocsvm(X, params), ConfigError);
    }
    SUBCASE("non-positive tolerance") {
        params.tol = 0.0;
        CHECK_THROWS_AS(solve_ocsvm(X, params), ConfigError);
    }
    SUBCASE("zero iteration budget") {
        params.max_iter = 0;
        CHECK_THROWS_AS(solve_ocsvm(X, params), ConfigError);
    }
}

TEST_CASE("an impossible tolerance raises a convergence error") {
    const Eigen::MatrixXd X = testutil::gauss(200, 2, 149);
    OcsvmParams params;
    params.tol = 1e-14;
    params.max_iter = 1;
    CHECK_THROWS_AS(solve_ocsvm(X, params), ConvergenceError);
}
