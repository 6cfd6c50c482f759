#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "detail.hpp"
#include "lobsig/detectors/mcd.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/rng.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

using detail::CovFactor;

double covariance_det(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < cov.rows(); ++i)
            log_det += std::log(llt.matrixLLT()(i, i));
        return std::exp(2.0 * log_det);
    }
    double det = cov.partialPivLu().determinant();
    return det > 0.0 ? det : 0.0;
}

bool factors_cleanly(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    return llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 1e-154;
}

// One concentration step: estimate location/scatter on `subset`, then keep
// the h rows closest in Mahalanobis distance. Ties break by canonical rank so
// the selected set depends only on row content.
struct CStep {
    std::vector<int> subset;  // sorted by canonical rank
    double det = 0.0;         // determinant of the estimate that produced it
};

CStep concentration_step(const Eigen::MatrixXd& X, const std::vector<int>& subset, int h,
                         const std::vector<int>& rank) {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    mean_cov_rows(X, subset, mean, cov);

    CStep out;
    out.det = covariance_det(cov);
    auto d2 = detail::mahalanobis_sq(X, mean, detail::factor_covariance(cov));

    const int n = static_cast<int>(X.rows());
    std::vector<std::pair<double, int>> by_dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        by_dist[static_cast<std::size_t>(i)] = {d2[static_cast<std::size_t>(i)],
                                                rank[static_cast<std::size_t>(i)]};
    std::nth_element(by_dist.begin(), by_dist.begin() + (h - 1), by_dist.end());
    by_dist.resize(static_cast<std::size_t>(h));
    std::sort(by_dist.begin(), by_dist.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    // map canonical ranks back to row indices
    std::vector<int> inv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(rank[static_cast<std::size_t>(i)])] = i;
    out.subset.reserve(static_cast<std::size_t>(h));
    for (const auto& [d, r] : by_dist) out.subset.push_back(inv[static_cast<std::size_t>(r)]);
    return out;
}

double estimate_det(const Eigen::MatrixXd& X, const std::vector<int>& subset) {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    mean_cov_rows(X, subset, mean, cov);
    return covariance_det(cov);
}

}  // namespace

McdFit fit_mcd(const Eigen::MatrixXd& X, const McdParams& params, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (!(params.contamination > 0.0) || !(params.contamination < 0.5))
        throw ConfigError("MCD contamination must lie in (0, 0.5)");
    if (params.n_starts < 1 || params.refine_best < 1)
        throw ConfigError("MCD start counts must be positive");
    const int h = static_cast<int>(std::floor(n * (1.0 - params.contamination)));
    if (h < p + 1)
        throw ConfigError("MCD subset size h = " + std::to_string(h) +
                          " is below p + 1 = " + std::to_string(p + 1) + "; need more rows");

    const std::vector<int> order = canonical_order(X);
    const std::vector<int> rank = canonical_rank(X);

    McdFit fit;
    fit.h = h;

    if (h >= n) {
        // no robustness possible; degenerate full-sample estimate
        fit.subset = order;
        mean_cov_rows(X, fit.subset, fit.mean, fit.subset_cov);
        fit.subset_det = covariance_det(fit.subset_cov);
        fit.consistency = 1.0;
        fit.cov = fit.subset_cov;
        return fit;
    }

    // Random starts live in canonical-rank space: the sampled *content* is
    // the same no matter how the input rows were ordered.
    std::vector<CStep> candidates;
    candidates.reserve(static_cast<std::size_t>(params.n_starts));
    std::vector<char> taken(static_cast<std::size_t>(n));
    for (int s = 0; s < params.n_starts; ++s) {
        Rng rng(mix64(seed, static_cast<std::uint64_t>(s) + 1));
        std::fill(taken.begin(), taken.end(), 0);
        std::vector<int> start;
        auto draw_row = [&]() -> int {
            for (;;) {
                int r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
                if (!taken[static_cast<std::size_t>(r)]) {
                    taken[static_cast<std::size_t>(r)] = 1;
                    return order[static_cast<std::size_t>(r)];
                }
            }
        };
        for (int i = 0; i < p + 1; ++i) start.push_back(draw_row());
        std::sort(start.begin(), start.end(),
                  [&](int a, int b) { return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)]; });

        // grow degenerate starts until the scatter matrix factors
        while (static_cast<int>(start.size()) < h) {
            Eigen::VectorXd mean;
            Eigen::MatrixXd cov;
            mean_cov_rows(X, start, mean, cov);
            if (factors_cleanly(cov)) break;
            start.push_back(draw_row());
            std::sort(start.begin(), start.end(), [&](int a, int b) {
                return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
            });
        }

        CStep cand = concentration_step(X, start, h, rank);
        cand = concentration_step(X, cand.subset, h, rank);
        cand.det = estimate_det(X, cand.subset);
        candidates.push_back(std::move(cand));
    }

    // refine the most promising candidates to convergence
    std::vector<int> idx(candidates.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return candidates[static_cast<std::size_t>(a)].det < candidates[static_cast<std::size_t>(b)].det;
    });
    const int n_refine = std::min<int>(params.refine_best, static_cast<int>(idx.size()));

    std::vector<int> best_subset;
    double best_det = std::numeric_limits<double>::infinity();
    int best_csteps = 0;
    for (int c = 0; c < n_refine; ++c) {
        std::vector<int> subset = candidates[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])].subset;
        double det = candidates[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])].det;
        int steps = 0;
        while (det > 0.0) {
            if (steps >= params.max_csteps)
                throw ConvergenceError("MCD concentration steps did not converge", steps);
            CStep next = concentration_step(X, subset, h, rank);
            ++steps;
            if (next.subset == subset) break;
            double next_det = estimate_det(X, next.subset);
            subset = std::move(next.subset);
            bool settled = std::abs(det - next_det) <= params.cstep_tol * std::max(det, 1e-300);
            det = next_det;
            if (settled) break;
        }
        if (det < best_det) {
            best_det = det;
            best_subset = std::move(subset);
            best_csteps = steps;
        }
    }

    fit.subset = std::move(best_subset);
    fit.subset_det = best_det;
    fit.csteps = best_csteps;
    mean_cov_rows(X, fit.subset, fit.mean, fit.subset_cov);
    fit.consistency = mcd_consistency_factor(static_cast<double>(h) / n, p);
    fit.cov = fit.consistency * fit.subset_cov;
    return fit;
}

ScoreVector score_empirical_covariance(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<EcParams>(spec.params);
    if (!(params.label_percentile > 0.0) || !(params.label_percentile < 100.0))
        throw ConfigError("EC label percentile must lie in (0, 100)");
    const auto& M = X.values;
    if (M.rows() < 2) throw ValidationError("empirical covariance needs at least 2 rows");

    const std::vector<int> order = canonical_order(M);
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    mean_cov_rows(M, order, mean, cov);
    CovFactor factor = detail::factor_covariance(std::move(cov));

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = detail::mahalanobis_sq(M, mean, factor);
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.label_percentile / 100.0);
    out.fit_metadata["ridge"] = factor.ridge;
    double mean_d2 = 0.0;
    for (int i : order) mean_d2 += out.raw_scores[static_cast<std::size_t>(i)];
    out.fit_metadata["mean_distance_sq"] = mean_d2 / static_cast<double>(out.raw_scores.size());
    return out;
}

ScoreVector score_mcd(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<McdParams>(spec.params);
    const auto& M = X.values;

    McdFit fit = fit_mcd(M, params, spec.seed);
    CovFactor factor = detail::factor_covariance(fit.cov);

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = detail::mahalanobis_sq(M, fit.mean, factor);
    const double cutoff = chi2_quantile(1.0 - params.contamination, static_cast<int>(M.cols()));
    std::vector<std::uint8_t> labels(out.raw_scores.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = out.raw_scores[i] > cutoff ? 1 : 0;
    out.native_labels = std::move(labels);
    out.fit_metadata["h"] = fit.h;
    out.fit_metadata["subset_det"] = fit.subset_det;
    out.fit_metadata["consistency"] = fit.consistency;
    out.fit_metadata["csteps"] = fit.csteps;
    out.fit_metadata["chi2_cutoff"] = cutoff;
    out.fit_metadata["ridge"] = factor.ridge;
    return out;
}

ScoreVector score_elliptic_envelope(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<EeParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    const int p = static_cast<int>(M.cols());

    McdFit core = fit_mcd(M, params.core, spec.seed);
    auto core_d2 = detail::mahalanobis_sq(M, core.mean, detail::factor_covariance(core.cov));

    // Reweighting: rows whose robust distance clears the 97.5% chi-squared
    // bound re-estimate location and scatter. The scatter picks up the
    // consistency factor for the kept fraction, so a kept set identical to
    // the MCD subset reproduces the MCD estimate exactly.
    const double keep_cutoff = chi2_quantile(0.975, p);
    std::vector<int> kept;
    for (int i : canonical_order(M))
        if (core_d2[static_cast<std::size_t>(i)] <= keep_cutoff) kept.push_back(i);

    ScoreVector out;
    out.spec = spec;
    double ridge = 0.0;
    if (static_cast<int>(kept.size()) <= p) {
        // reweighting impossible; fall back to the raw MCD estimate
        CovFactor factor = detail::factor_covariance(core.cov);
        out.raw_scores = detail::mahalanobis_sq(M, core.mean, factor);
        ridge = factor.ridge;
        out.fit_metadata["reweighted"] = 0.0;
    } else {
        Eigen::VectorXd mean;
        Eigen::MatrixXd cov;
        mean_cov_rows(M, kept, mean, cov);
        double consistency =
            mcd_consistency_factor(static_cast<double>(kept.size()) / n, p);
        cov *= consistency;
        CovFactor factor = detail::factor_covariance(std::move(cov));
        out.raw_scores = detail::mahalanobis_sq(M, mean, factor);
        ridge = factor.ridge;
        out.fit_metadata["reweighted"] = 1.0;
        out.fit_metadata["reweight_consistency"] = consistency;
    }

    const double label_cutoff = chi2_quantile(1.0 - params.core.contamination, p);
    std::vector<std::uint8_t> labels(out.raw_scores.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = out.raw_scores[i] > label_cutoff ? 1 : 0;
    out.native_labels = std::move(labels);
    out.fit_metadata["kept"] = static_cast<double>(kept.size());
    out.fit_metadata["h"] = core.h;
    out.fit_metadata["subset_det"] = core.subset_det;
    out.fit_metadata["chi2_cutoff"] = label_cutoff;
    out.fit_metadata["ridge"] = ridge;
    return out;
}

}  // namespace lobsig
