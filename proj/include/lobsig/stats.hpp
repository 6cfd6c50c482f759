#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lobsig {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Chi-squared CDF with k degrees of freedom.
double chi2_cdf(double x, int k);

/// Chi-squared quantile: smallest x with CDF(x) = prob. prob in [0, 1);
/// prob >= 1 returns +inf.
double chi2_quantile(double prob, int k);

/// Linear-interpolation percentile (rank = q * (n - 1) on the sorted
/// values). q in [0, 1].
double percentile_linear(std::span<const double> values, double q);

/// Nearest-rank percentile: the ceil(q * n)-th smallest value.
double percentile_nearest_rank(std::span<const double> values, double q);

/// MCD consistency factor for subset fraction delta = h / n at dimension p:
/// delta / F_{chi2,p+2}(F^-1_{chi2,p}(delta)). Returns 1 for delta >= 1.
double mcd_consistency_factor(double delta, int p);

/// Indices of matrix rows sorted lexicographically by content (ties by row
/// index). Set-level accumulations iterate rows in this order so results do
/// not depend on input row order.
std::vector<int> canonical_order(const Eigen::MatrixXd& X);

/// rank[i] = position of row i in the canonical order.
std::vector<int> canonical_rank(const Eigen::MatrixXd& X);

/// Mean and population covariance (divisor = count) of the given rows,
/// accumulated in the order given by `rows`.
void mean_cov_rows(const Eigen::MatrixXd& X, std::span<const int> rows,
                   Eigen::VectorXd& mean, Eigen::MatrixXd& cov);

/// Runs fn(begin, end) over [0, n) chunks on up to hardware_concurrency
/// threads. Falls back to a direct call when n is small.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace lobsig
