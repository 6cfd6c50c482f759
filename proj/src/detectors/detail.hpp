#pragma once

// Internal helpers shared by the detector implementations. Everything here
// is deliberately order-insensitive: set-level reductions walk rows in
// canonical (content-sorted) order so that permuting the input rows can only
// permute the output scores.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/detectors/detector.hpp"

namespace lobsig::detail {

/// Cholesky factor of a covariance matrix, ridge-regularized when the plain
/// matrix fails to factor. `ridge` is the lambda actually added (0 if none).
struct CovFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double ridge = 0.0;
};

/// Factors `cov`, adding lambda = 1e-6 * trace / p (with a tiny absolute
/// floor) and retrying once if the direct factorization is not positive
/// definite. Throws ValidationError if still singular.
CovFactor factor_covariance(Eigen::MatrixXd cov);

/// Squared Mahalanobis distance of every row of X around (mean, factor).
std::vector<double> mahalanobis_sq(const Eigen::MatrixXd& X, const Eigen::VectorXd& mean,
                                   const CovFactor& factor);

/// Native labels: 1 where score strictly exceeds the linear-interpolation
/// q-quantile of the scores themselves.
std::vector<std::uint8_t> labels_above_quantile(const std::vector<double>& scores, double q);

/// Row-major copy of X for cache-friendly pairwise scans (Eigen stores
/// column-major; O(n^2) row walks over that layout thrash the cache).
struct FlatRows {
    std::vector<double> data;
    int n = 0;
    int p = 0;
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * p; }
};
FlatRows flatten_rows(const Eigen::MatrixXd& X);

inline double dist_sq(const FlatRows& F, int i, int j) {
    const double* a = F.row(i);
    const double* b = F.row(j);
    double s = 0.0;
    for (int d = 0; d < F.p; ++d) {
        double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

/// Exact k-nearest-neighbor search over rows (self excluded), ties in
/// distance broken by row index. idx[i] / dist[i] are the k neighbors of row
/// i sorted by (distance, index).
struct KnnTable {
    std::vector<std::vector<int>> idx;
    std::vector<std::vector<double>> dist;
};
KnnTable knn_all(const Eigen::MatrixXd& X, int k);

/// Validates a neighbor-count style parameter against n.
void require_k_below_n(int k, Eigen::Index n, const char* what);

}  // namespace lobsig::detail
