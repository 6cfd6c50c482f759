#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/detectors/detector.hpp"

namespace lobsig {

/// Result of the minimum-covariance-determinant search. `subset_cov` is the
/// plain population covariance of the h-subset; `cov` is subset_cov scaled by
/// the consistency factor so distances are chi-squared calibrated.
struct McdFit {
    std::vector<int> subset;        // the h row indices, sorted canonically
    Eigen::VectorXd mean;
    Eigen::MatrixXd subset_cov;     // unscaled h-subset covariance
    Eigen::MatrixXd cov;            // consistency-scaled covariance
    double subset_det = 0.0;        // det(subset_cov)
    double consistency = 1.0;
    int h = 0;
    int csteps = 0;                 // C-steps spent refining the winner
};

/// FAST-MCD: random (p+1)-element starts grown to h-subsets by concentration
/// steps. Deterministic for a given seed and invariant to row order (starts
/// are drawn in content-sorted row space).
McdFit fit_mcd(const Eigen::MatrixXd& X, const McdParams& params, std::uint64_t seed);

}  // namespace lobsig
