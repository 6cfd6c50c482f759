#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lobsig/detectors/detector.hpp"

namespace lobsig {

/// Converged solution of the one-class SVM dual
///   min 1/2 a' K a   s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
/// with RBF kernel K_ij = exp(-gamma |x_i - x_j|^2).
struct OcsvmModel {
    std::vector<double> alpha;
    std::vector<double> decision;  // f(x_i) = (K a)_i - rho; negative outside
    double rho = 0.0;
    double gamma = 0.0;
    double objective = 0.0;  // 1/2 a' K a
    int sweeps = 0;
    long long updates = 0;
    int support_count = 0;      // a_i > 0
    int margin_violations = 0;  // f(x_i) < -tol
};

/// Sequential minimal optimization on the maximal violating pair. Throws
/// ConvergenceError when the KKT gap stays above params.tol after
/// params.max_iter sweeps (a sweep is up to n pair updates).
OcsvmModel solve_ocsvm(const Eigen::MatrixXd& X, const OcsvmParams& params);

}  // namespace lobsig
