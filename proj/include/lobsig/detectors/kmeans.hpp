#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/detectors/detector.hpp"

namespace lobsig {

struct KmeansFit {
    Eigen::MatrixXd centroids;  // k x p
    std::vector<int> assignment;
    std::vector<int> cluster_size;
    double objective = 0.0;  // sum of squared distances to assigned centroids
    int iterations = 0;
};

/// Lloyd's algorithm with greedy farthest-point seeding. The first centroid
/// is drawn in content-sorted row space, so the fit is invariant to row
/// order; assignment ties break toward the lower cluster index.
KmeansFit fit_kmeans(const Eigen::MatrixXd& X, int k, double tol, int max_iter,
                     std::uint64_t seed);

}  // namespace lobsig
