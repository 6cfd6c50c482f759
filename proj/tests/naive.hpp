#pragma once

// Brute-force reference implementations used to cross-check the library's
// detectors. Written for clarity, not speed: full distance matrices, plain
// sorts, matrix inverses. Conventions mirror the library contract: neighbor
// ties break toward the lower row index, a row is never its own neighbor,
// and ordered traversals follow the content-sorted (canonical) row order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/stats.hpp"

namespace naive {

inline Eigen::MatrixXd dist_matrix(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) D(i, j) = (X.row(i) - X.row(j)).norm();
    return D;
}

/// Indices of the k nearest neighbors of each row (self excluded, ties by
/// row index), nearest first.
inline std::vector<std::vector<int>> knn_indices(const Eigen::MatrixXd& D, int k) {
    const int n = static_cast<int>(D.rows());
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> cand;
        for (int j = 0; j < n; ++j)
            if (j != i) cand.push_back({D(i, j), j});
        std::sort(cand.begin(), cand.end());
        for (int m = 0; m < k; ++m) out[static_cast<std::size_t>(i)].push_back(cand[static_cast<std::size_t>(m)].second);
    }
    return out;
}

inline std::vector<double> mahalanobis_sq(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd C = (X.rowwise() - mean).transpose() * (X.rowwise() - mean) /
                        static_cast<double>(n);
    Eigen::MatrixXd Ci = C.inverse();
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd c = (X.row(i) - mean).transpose();
        d2[static_cast<std::size_t>(i)] = c.dot(Ci * c);
    }
    return d2;
}

inline std::vector<double> hbos(const Eigen::MatrixXd& X, int bins, double floor) {
    const int n = static_cast<int>(X.rows());
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double lo = X.col(j).minCoeff();
        const double hi = X.col(j).maxCoeff();
        if (!(hi > lo)) continue;
        const double width = (hi - lo) / bins;
        std::vector<int> count(static_cast<std::size_t>(bins), 0);
        std::vector<int> bin(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            int b = static_cast<int>(std::floor((X(i, j) - lo) / width));
            b = std::clamp(b, 0, bins - 1);
            bin[static_cast<std::size_t>(i)] = b;
            ++count[static_cast<std::size_t>(b)];
        }
        for (int i = 0; i < n; ++i) {
            double density = (count[static_cast<std::size_t>(bin[static_cast<std::size_t>(i)])] /
                              static_cast<double>(n)) / width;
            scores[static_cast<std::size_t>(i)] += -std::log(std::max(density, floor));
        }
    }
    return scores;
}

inline std::vector<double> knn_score(const Eigen::MatrixXd& X, int k) {
    const auto D = dist_matrix(X);
    const auto nbr = knn_indices(D, k);
    std::vector<double> out(nbr.size());
    for (std::size_t i = 0; i < nbr.size(); ++i)
        out[i] = D(static_cast<Eigen::Index>(i), nbr[i].back());
    return out;
}

inline std::vector<double> lof(const Eigen::MatrixXd& X, int k) {
    const auto D = dist_matrix(X);
    const auto nbr = knn_indices(D, k);
    const std::size_t n = nbr.size();
    std::vector<double> kdist(n);
    for (std::size_t i = 0; i < n; ++i) kdist[i] = D(static_cast<Eigen::Index>(i), nbr[i].back());
    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int q : nbr[i])
            sum += std::max(kdist[static_cast<std::size_t>(q)], D(static_cast<Eigen::Index>(i), q));
        lrd[i] = 1.0 / std::max(sum / k, 1e-12);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int q : nbr[i]) sum += lrd[static_cast<std::size_t>(q)];
        out[i] = sum / k / lrd[i];
    }
    return out;
}

struct DbscanRef {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    double eps = 0.0;
};

inline DbscanRef dbscan(const Eigen::MatrixXd& X, int min_pts, double eps_param = 0.0) {
    const auto D = dist_matrix(X);
    const int n = static_cast<int>(X.rows());
    std::vector<double> kd(static_cast<std::size_t>(n), 0.0);
    if (min_pts > 1) {
        const auto nbr = knn_indices(D, min_pts - 1);
        for (int i = 0; i < n; ++i)
            kd[static_cast<std::size_t>(i)] = D(i, nbr[static_cast<std::size_t>(i)].back());
    }
    DbscanRef r;
    r.eps = eps_param > 0.0 ? eps_param : lobsig::percentile_linear(kd, 0.9);
    std::vector<int> cores;
    for (int i = 0; i < n; ++i)
        if (kd[static_cast<std::size_t>(i)] <= r.eps) cores.push_back(i);
    r.scores.assign(static_cast<std::size_t>(n), 0.0);
    r.labels.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (kd[static_cast<std::size_t>(i)] <= r.eps) continue;
        double best = std::numeric_limits<double>::infinity();
        if (cores.empty()) {
            for (int j = 0; j < n; ++j)
                if (j != i) best = std::min(best, D(i, j));
        } else {
            for (int j : cores) best = std::min(best, D(i, j));
        }
        r.scores[static_cast<std::size_t>(i)] = best;
        r.labels[static_cast<std::size_t>(i)] = best > r.eps ? 1 : 0;
    }
    return r;
}

/// Reachability scores via the textbook loop: linear scans instead of a
/// heap, ties on reachability broken by canonical rank, unreached rows get
/// 1.5x the largest finite reachability.
inline std::vector<double> optics(const Eigen::MatrixXd& X, int min_pts) {
    const auto D = dist_matrix(X);
    const int n = static_cast<int>(X.rows());
    std::vector<double> cd(static_cast<std::size_t>(n), 0.0);
    if (min_pts > 1) {
        const auto nbr = knn_indices(D, min_pts - 1);
        for (int i = 0; i < n; ++i)
            cd[static_cast<std::size_t>(i)] = D(i, nbr[static_cast<std::size_t>(i)].back());
    }
    const auto order = lobsig::canonical_order(X);
    const auto rank = lobsig::canonical_rank(X);

    const double undef = -1.0;
    std::vector<double> reach(static_cast<std::size_t>(n), undef);
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<char> processed(static_cast<std::size_t>(n), 0);

    auto expand = [&](int o) {
        processed[static_cast<std::size_t>(o)] = 1;
        for (int q = 0; q < n; ++q) {
            if (processed[static_cast<std::size_t>(q)]) continue;
            best[static_cast<std::size_t>(q)] =
                std::min(best[static_cast<std::size_t>(q)],
                         std::max(cd[static_cast<std::size_t>(o)], D(o, q)));
        }
    };
    for (int start : order) {
        if (processed[static_cast<std::size_t>(start)]) continue;
        expand(start);
        for (;;) {
            int pick = -1;
            for (int q = 0; q < n; ++q) {
                if (processed[static_cast<std::size_t>(q)] ||
                    best[static_cast<std::size_t>(q)] == std::numeric_limits<double>::infinity())
                    continue;
                if (pick < 0 || best[static_cast<std::size_t>(q)] < best[static_cast<std::size_t>(pick)] ||
                    (best[static_cast<std::size_t>(q)] == best[static_cast<std::size_t>(pick)] &&
                     rank[static_cast<std::size_t>(q)] < rank[static_cast<std::size_t>(pick)]))
                    pick = q;
            }
            if (pick < 0) break;
            reach[static_cast<std::size_t>(pick)] = best[static_cast<std::size_t>(pick)];
            expand(pick);
        }
    }

    double max_finite = 0.0;
    for (double r : reach)
        if (r != undef) max_finite = std::max(max_finite, r);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = reach[i] == undef ? 1.5 * max_finite : reach[i];
    return out;
}

/// CBLOF scores from a given clustering (centroids row per cluster,
/// assignment per row): clusters sorted by size descending, the boundary is
/// the first index where the cumulative share reaches alpha or the size
/// ratio to the next cluster reaches beta; small-cluster rows score their
/// distance to the nearest large centroid.
inline std::vector<double> cblof(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids,
                                 const std::vector<int>& assignment,
                                 const std::vector<int>& sizes, double alpha, double beta,
                                 bool weighted) {
    const int k = static_cast<int>(centroids.rows());
    const int n = static_cast<int>(X.rows());
    std::vector<int> by_size(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) by_size[static_cast<std::size_t>(c)] = c;
    std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
        return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
    });
    int boundary = k - 1;
    long long prefix = 0;
    for (int i = 0; i < k; ++i) {
        prefix += sizes[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])];
        const bool mass = static_cast<double>(prefix) >= alpha * static_cast<double>(n);
        const bool ratio = i + 1 < k &&
                           static_cast<double>(sizes[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])]) >=
                               beta * static_cast<double>(sizes[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i + 1)])]);
        if (mass || ratio) {
            boundary = i;
            break;
        }
    }
    std::vector<char> large(static_cast<std::size_t>(k), 0);
    for (int i = 0; i <= boundary; ++i) large[static_cast<std::size_t>(by_size[static_cast<std::size_t>(i)])] = 1;

    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int own = assignment[static_cast<std::size_t>(i)];
        double d;
        if (large[static_cast<std::size_t>(own)]) {
            d = (X.row(i) - centroids.row(own)).norm();
        } else {
            d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c)
                if (large[static_cast<std::size_t>(c)])
                    d = std::min(d, (X.row(i) - centroids.row(c)).norm());
        }
        if (weighted) d *= static_cast<double>(sizes[static_cast<std::size_t>(own)]);
        out[static_cast<std::size_t>(i)] = d;
    }
    return out;
}

inline std::vector<double> sod(const Eigen::MatrixXd& X, int ref_size, int snn_k,
                               double variance_frac) {
    const auto D = dist_matrix(X);
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    auto nbr = knn_indices(D, snn_k);
    for (auto& v : nbr) std::sort(v.begin(), v.end());
    const auto rank = lobsig::canonical_rank(X);

    auto shared = [&](int a, int b) {
        int c = 0;
        for (int x : nbr[static_cast<std::size_t>(a)])
            for (int y : nbr[static_cast<std::size_t>(b)])
                if (x == y) ++c;
        return c;
    };

    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        struct C {
            int shared;
            double d2;
            int rank;
            int row;
        };
        std::vector<C> cand;
        for (int q = 0; q < n; ++q) {
            if (q == i) continue;
            cand.push_back({shared(i, q), D(i, q) * D(i, q), rank[static_cast<std::size_t>(q)], q});
        }
        std::sort(cand.begin(), cand.end(), [](const C& a, const C& b) {
            if (a.shared != b.shared) return a.shared > b.shared;
            if (a.d2 != b.d2) return a.d2 < b.d2;
            return a.rank < b.rank;
        });
        cand.resize(static_cast<std::size_t>(ref_size));

        Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
        for (const C& c : cand) mean += X.row(c.row).transpose();
        mean /= ref_size;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(p);
        for (const C& c : cand) {
            Eigen::VectorXd d = X.row(c.row).transpose() - mean;
            var += d.cwiseProduct(d);
        }
        var /= ref_size;

        const double threshold = variance_frac * var.sum() / p;
        double dist = 0.0;
        int dims = 0;
        for (int d = 0; d < p; ++d) {
            if (var[d] < threshold) {
                const double diff = X(i, d) - mean[d];
                dist += diff * diff;
                ++dims;
            }
        }
        out[static_cast<std::size_t>(i)] = dims > 0 ? std::sqrt(dist / dims) : 0.0;
    }
    return out;
}

inline double kmeans_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids,
                               const std::vector<int>& assignment) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        obj += (X.row(i) - centroids.row(assignment[static_cast<std::size_t>(i)])).squaredNorm();
    return obj;
}

}  // namespace naive
