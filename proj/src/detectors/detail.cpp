#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

namespace lobsig::detail {

CovFactor factor_covariance(Eigen::MatrixXd cov) {
    const auto p = cov.rows();
    CovFactor f;
    f.llt.compute(cov);
    if (f.llt.info() == Eigen::Success) {
        // LLT can succeed on barely-positive matrices whose inverse is
        // garbage; guard on the diagonal of the factor.
        double min_diag = f.llt.matrixLLT().diagonal().minCoeff();
        if (min_diag > 1e-154) return f;
    }
    double lambda = 1e-6 * cov.trace() / static_cast<double>(p);
    if (!(lambda > 0.0)) lambda = 1e-12;
    cov.diagonal().array() += lambda;
    f.ridge = lambda;
    f.llt.compute(cov);
    if (f.llt.info() != Eigen::Success)
        throw ValidationError("covariance matrix is singular even after ridge regularization");
    return f;
}

std::vector<double> mahalanobis_sq(const Eigen::MatrixXd& X, const Eigen::VectorXd& mean,
                                   const CovFactor& factor) {
    const auto n = X.rows();
    std::vector<double> d2(static_cast<std::size_t>(n));
    const auto L = factor.llt.matrixL();
    Eigen::VectorXd diff(X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        diff = X.row(i).transpose() - mean;
        L.solveInPlace(diff);
        d2[static_cast<std::size_t>(i)] = diff.squaredNorm();
    }
    return d2;
}

std::vector<std::uint8_t> labels_above_quantile(const std::vector<double>& scores, double q) {
    double tau = percentile_linear(scores, q);
    std::vector<std::uint8_t> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] > tau ? 1 : 0;
    return labels;
}

FlatRows flatten_rows(const Eigen::MatrixXd& X) {
    FlatRows f;
    f.n = static_cast<int>(X.rows());
    f.p = static_cast<int>(X.cols());
    f.data.resize(static_cast<std::size_t>(f.n) * f.p);
    for (int i = 0; i < f.n; ++i)
        for (int d = 0; d < f.p; ++d)
            f.data[static_cast<std::size_t>(i) * f.p + d] = X(i, d);
    return f;
}

KnnTable knn_all(const Eigen::MatrixXd& X, int k) {
    const int n = static_cast<int>(X.rows());
    require_k_below_n(k, n, "neighbor count k");
    const FlatRows F = flatten_rows(X);

    KnnTable t;
    t.idx.assign(static_cast<std::size_t>(n), {});
    t.dist.assign(static_cast<std::size_t>(n), {});

    parallel_for(n, [&](int b, int e) {
        // bounded max-heap of (squared distance, index); most candidates are
        // rejected against the heap top without a push
        std::vector<std::pair<double, int>> heap;
        heap.reserve(static_cast<std::size_t>(k) + 1);
        for (int i = b; i < e; ++i) {
            heap.clear();
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                std::pair<double, int> c{dist_sq(F, i, j), j};
                if (static_cast<int>(heap.size()) < k) {
                    heap.push_back(c);
                    std::push_heap(heap.begin(), heap.end());
                } else if (c < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = c;
                    std::push_heap(heap.begin(), heap.end());
                }
            }
            std::sort(heap.begin(), heap.end());
            auto& idx = t.idx[static_cast<std::size_t>(i)];
            auto& dist = t.dist[static_cast<std::size_t>(i)];
            idx.resize(static_cast<std::size_t>(k));
            dist.resize(static_cast<std::size_t>(k));
            for (int m = 0; m < k; ++m) {
                dist[static_cast<std::size_t>(m)] = std::sqrt(heap[static_cast<std::size_t>(m)].first);
                idx[static_cast<std::size_t>(m)] = heap[static_cast<std::size_t>(m)].second;
            }
        }
    });
    return t;
}

void require_k_below_n(int k, Eigen::Index n, const char* what) {
    if (k < 1) throw ConfigError(std::string(what) + " must be at least 1");
    if (k >= n)
        throw ConfigError(std::string(what) + " = " + std::to_string(k) +
                          " must be below the row count " + std::to_string(n));
}

}  // namespace lobsig::detail
