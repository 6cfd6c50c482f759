#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "detail.hpp"
#include "lobsig/detectors/kmeans.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/rng.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

double sq_dist_to_centroid(const detail::FlatRows& F, int row, const Eigen::MatrixXd& C, int c) {
    const double* x = F.row(row);
    double s = 0.0;
    for (int d = 0; d < F.p; ++d) {
        double t = x[d] - C(c, d);
        s += t * t;
    }
    return s;
}

}  // namespace

KmeansFit fit_kmeans(const Eigen::MatrixXd& X, int k, double tol, int max_iter,
                     std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (k < 1) throw ConfigError("cluster count must be at least 1");
    if (k > n)
        throw ConfigError("cluster count " + std::to_string(k) + " exceeds the row count " +
                          std::to_string(n));
    if (max_iter < 1) throw ConfigError("max iterations must be positive");

    const detail::FlatRows F = detail::flatten_rows(X);
    const std::vector<int> order = canonical_order(X);
    const std::vector<int> rank = canonical_rank(X);

    KmeansFit fit;
    fit.centroids.resize(k, p);

    // greedy farthest-point seeding, first pick drawn in canonical-rank space
    {
        Rng rng(seed);
        int first = order[static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(n)))];
        fit.centroids.row(0) = X.row(first);
        std::vector<double> nearest(static_cast<std::size_t>(n),
                                    std::numeric_limits<double>::infinity());
        for (int c = 1; c < k; ++c) {
            int best_row = -1;
            double best_d = -1.0;
            for (int i : order) {
                double d = sq_dist_to_centroid(F, i, fit.centroids, c - 1);
                auto& cur = nearest[static_cast<std::size_t>(i)];
                cur = std::min(cur, d);
                if (cur > best_d) {
                    best_d = cur;
                    best_row = i;
                }
            }
            fit.centroids.row(c) = X.row(best_row);
        }
    }

    fit.assignment.assign(static_cast<std::size_t>(n), -1);
    fit.cluster_size.assign(static_cast<std::size_t>(k), 0);
    std::vector<int> prev_assignment;
    double prev_obj = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (int iter = 1; iter <= max_iter; ++iter) {
        fit.iterations = iter;
        prev_assignment = fit.assignment;

        parallel_for(n, [&](int b, int e) {
            for (int i = b; i < e; ++i) {
                int best_c = 0;
                double best_d = sq_dist_to_centroid(F, i, fit.centroids, 0);
                for (int c = 1; c < k; ++c) {
                    double d = sq_dist_to_centroid(F, i, fit.centroids, c);
                    if (d < best_d) {
                        best_d = d;
                        best_c = c;
                    }
                }
                fit.assignment[static_cast<std::size_t>(i)] = best_c;
            }
        });

        std::fill(fit.cluster_size.begin(), fit.cluster_size.end(), 0);
        for (int i = 0; i < n; ++i) ++fit.cluster_size[static_cast<std::size_t>(fit.assignment[static_cast<std::size_t>(i)])];

        // an empty cluster takes over the row currently worst-served by its
        // centroid (ties toward canonical rank)
        for (int c = 0; c < k; ++c) {
            if (fit.cluster_size[static_cast<std::size_t>(c)] > 0) continue;
            int steal = -1;
            double worst = -1.0;
            for (int i : order) {
                if (fit.cluster_size[static_cast<std::size_t>(fit.assignment[static_cast<std::size_t>(i)])] <= 1)
                    continue;
                double d = sq_dist_to_centroid(F, i, fit.centroids,
                                               fit.assignment[static_cast<std::size_t>(i)]);
                if (d > worst) {
                    worst = d;
                    steal = i;
                }
            }
            if (steal < 0) break;  // fewer distinct rows than clusters
            --fit.cluster_size[static_cast<std::size_t>(fit.assignment[static_cast<std::size_t>(steal)])];
            fit.assignment[static_cast<std::size_t>(steal)] = c;
            fit.cluster_size[static_cast<std::size_t>(c)] = 1;
        }

        fit.centroids.setZero();
        for (int i : order)
            fit.centroids.row(fit.assignment[static_cast<std::size_t>(i)]) += X.row(i);
        for (int c = 0; c < k; ++c)
            if (fit.cluster_size[static_cast<std::size_t>(c)] > 0)
                fit.centroids.row(c) /= static_cast<double>(fit.cluster_size[static_cast<std::size_t>(c)]);

        double obj = 0.0;
        for (int i : order)
            obj += sq_dist_to_centroid(F, i, fit.centroids, fit.assignment[static_cast<std::size_t>(i)]);
        fit.objective = obj;

        if (fit.assignment == prev_assignment ||
            (std::isfinite(prev_obj) && prev_obj - obj <= tol * std::max(prev_obj, 1e-300))) {
            converged = true;
            break;
        }
        prev_obj = obj;
    }
    if (!converged)
        throw ConvergenceError("k-means did not converge within the iteration limit",
                               fit.iterations);
    return fit;
}

ScoreVector score_kmeans(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<KmeansParams>(spec.params);
    KmeansFit fit =
        fit_kmeans(X.values, params.n_clusters, params.tol, params.max_iter, spec.seed);

    const detail::FlatRows F = detail::flatten_rows(X.values);
    ScoreVector out;
    out.spec = spec;
    out.raw_scores.resize(static_cast<std::size_t>(F.n));
    for (int i = 0; i < F.n; ++i)
        out.raw_scores[static_cast<std::size_t>(i)] = std::sqrt(
            sq_dist_to_centroid(F, i, fit.centroids, fit.assignment[static_cast<std::size_t>(i)]));
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["objective"] = fit.objective;
    out.fit_metadata["iterations"] = fit.iterations;
    out.fit_metadata["clusters"] = params.n_clusters;
    return out;
}

ScoreVector score_cblof(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<CblofParams>(spec.params);
    if (!(params.alpha > 0.0) || params.alpha > 1.0)
        throw ConfigError("CBLOF alpha must lie in (0, 1]");
    if (!(params.beta >= 1.0)) throw ConfigError("CBLOF beta must be at least 1");
    KmeansFit fit =
        fit_kmeans(X.values, params.n_clusters, params.tol, params.max_iter, spec.seed);
    const int k = params.n_clusters;
    const int n = static_cast<int>(X.values.rows());

    // split clusters into large/small: order by size descending, cut at the
    // first index where the mass rule or the size-ratio rule fires
    std::vector<int> by_size(static_cast<std::size_t>(k));
    std::iota(by_size.begin(), by_size.end(), 0);
    std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
        return fit.cluster_size[static_cast<std::size_t>(a)] >
               fit.cluster_size[static_cast<std::size_t>(b)];
    });
    int boundary = k - 1;
    long long prefix = 0;
    for (int i = 0; i + 1 < k; ++i) {
        prefix += fit.cluster_size[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])];
        double next = fit.cluster_size[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i + 1)])];
        if (static_cast<double>(prefix) >= params.alpha * n ||
            static_cast<double>(fit.cluster_size[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])]) >=
                params.beta * next) {
            boundary = i;
            break;
        }
    }
    std::vector<std::uint8_t> is_large(static_cast<std::size_t>(k), 0);
    std::vector<int> large_clusters;
    for (int i = 0; i <= boundary; ++i) {
        is_large[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])] = 1;
        large_clusters.push_back(by_size[static_cast<std::size_t>(i)]);
    }

    const detail::FlatRows F = detail::flatten_rows(X.values);
    ScoreVector out;
    out.spec = spec;
    out.raw_scores.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int own = fit.assignment[static_cast<std::size_t>(i)];
        double d2;
        if (is_large[static_cast<std::size_t>(own)]) {
            d2 = sq_dist_to_centroid(F, i, fit.centroids, own);
        } else {
            d2 = std::numeric_limits<double>::infinity();
            for (int c : large_clusters)
                d2 = std::min(d2, sq_dist_to_centroid(F, i, fit.centroids, c));
        }
        double score = std::sqrt(d2);
        if (params.weighted)
            score *= static_cast<double>(fit.cluster_size[static_cast<std::size_t>(own)]);
        out.raw_scores[static_cast<std::size_t>(i)] = score;
    }
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["objective"] = fit.objective;
    out.fit_metadata["iterations"] = fit.iterations;
    out.fit_metadata["clusters"] = k;
    out.fit_metadata["large_clusters"] = static_cast<double>(large_clusters.size());
    return out;
}

}  // namespace lobsig
