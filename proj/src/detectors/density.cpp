#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "detail.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

// Distance to the minPts-th nearest row counting the row itself as the
// first; 0 everywhere when minPts = 1.
std::vector<double> min_pts_distance(const Eigen::MatrixXd& X, int min_pts) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    if (min_pts == 1) return std::vector<double>(n, 0.0);
    auto t = detail::knn_all(X, min_pts - 1);
    std::vector<double> kd(n);
    for (std::size_t i = 0; i < n; ++i) kd[i] = t.dist[i].back();
    return kd;
}

int resolve_min_pts(int min_pts, const Eigen::MatrixXd& X) {
    if (min_pts == 0) min_pts = 2 * static_cast<int>(X.cols());
    if (min_pts < 1) throw ConfigError("minPts must be at least 1");
    if (min_pts >= static_cast<int>(X.rows()))
        throw ConfigError("minPts = " + std::to_string(min_pts) +
                          " must be below the row count " + std::to_string(X.rows()));
    return min_pts;
}

}  // namespace

ScoreVector score_dbscan(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<DbscanParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    const int min_pts = resolve_min_pts(params.min_pts, M);
    if (params.eps < 0.0) throw ConfigError("DBSCAN eps cannot be negative");

    // A row is core iff its minPts-distance is within eps, so the k-distance
    // table doubles as the core test.
    std::vector<double> kd = min_pts_distance(M, min_pts);
    const double eps = params.eps > 0.0 ? params.eps : percentile_linear(kd, 0.9);

    std::vector<int> core_rows;
    std::vector<std::uint8_t> is_core(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (kd[static_cast<std::size_t>(i)] <= eps) {
            is_core[static_cast<std::size_t>(i)] = 1;
            core_rows.push_back(i);
        }
    }

    const detail::FlatRows F = detail::flatten_rows(M);
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    std::vector<std::uint8_t> noise(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            if (is_core[static_cast<std::size_t>(i)]) continue;
            double best = std::numeric_limits<double>::infinity();
            if (core_rows.empty()) {
                // degenerate fit with no dense region anywhere: fall back to
                // nearest-neighbor distance so scores stay finite
                for (int j = 0; j < n; ++j)
                    if (j != i) best = std::min(best, detail::dist_sq(F, i, j));
            } else {
                for (int j : core_rows) best = std::min(best, detail::dist_sq(F, i, j));
            }
            double d = n > 1 ? std::sqrt(best) : 0.0;
            scores[static_cast<std::size_t>(i)] = d;
            noise[static_cast<std::size_t>(i)] = d > eps ? 1 : 0;
        }
    });

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = std::move(scores);
    out.native_labels = std::move(noise);
    out.fit_metadata["eps"] = eps;
    out.fit_metadata["min_pts"] = min_pts;
    out.fit_metadata["core_count"] = static_cast<double>(core_rows.size());
    return out;
}

ScoreVector score_optics(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<OpticsParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    const int min_pts = resolve_min_pts(params.min_pts, M);
    if (!(params.label_quantile > 0.0) || params.label_quantile > 1.0)
        throw ConfigError("OPTICS label quantile must lie in (0, 1]");

    const std::vector<double> core_dist = min_pts_distance(M, min_pts);
    const std::vector<int> order = canonical_order(M);
    const std::vector<int> rank = canonical_rank(M);
    const detail::FlatRows F = detail::flatten_rows(M);

    const double undef = -1.0;
    std::vector<double> reach(static_cast<std::size_t>(n), undef);
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> processed(static_cast<std::size_t>(n), 0);

    // lazy min-heap keyed by (reachability, canonical rank)
    struct Seed {
        double reach;
        int rank;
        int row;
        bool operator>(const Seed& o) const {
            return reach != o.reach ? reach > o.reach : rank > o.rank;
        }
    };
    std::priority_queue<Seed, std::vector<Seed>, std::greater<Seed>> seeds;

    auto expand = [&](int o) {
        processed[static_cast<std::size_t>(o)] = 1;
        const double cd = core_dist[static_cast<std::size_t>(o)];
        for (int q = 0; q < n; ++q) {
            if (processed[static_cast<std::size_t>(q)]) continue;
            double r = std::max(cd, std::sqrt(detail::dist_sq(F, o, q)));
            if (r < best[static_cast<std::size_t>(q)]) {
                best[static_cast<std::size_t>(q)] = r;
                seeds.push({r, rank[static_cast<std::size_t>(q)], q});
            }
        }
    };

    for (int start : order) {
        if (processed[static_cast<std::size_t>(start)]) continue;
        expand(start);  // no predecessor: reachability stays undefined
        while (!seeds.empty()) {
            Seed s = seeds.top();
            seeds.pop();
            if (processed[static_cast<std::size_t>(s.row)] ||
                s.reach != best[static_cast<std::size_t>(s.row)])
                continue;
            reach[static_cast<std::size_t>(s.row)] = s.reach;
            expand(s.row);
        }
    }

    double max_finite = 0.0;
    int n_undef = 0;
    for (double r : reach)
        if (r != undef) max_finite = std::max(max_finite, r);
    std::vector<double> scores(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (reach[i] == undef) {
            scores[i] = 1.5 * max_finite;
            ++n_undef;
        } else {
            scores[i] = reach[i];
        }
    }

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = std::move(scores);
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.label_quantile);
    out.fit_metadata["min_pts"] = min_pts;
    out.fit_metadata["max_finite_reach"] = max_finite;
    out.fit_metadata["undefined_count"] = n_undef;
    return out;
}

}  // namespace lobsig
