#include <algorithm>
#include <cmath>
#include <vector>

#include "detail.hpp"
#include "lobsig/errors.hpp"

namespace lobsig {

ScoreVector score_knn(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<KnnParams>(spec.params);
    auto t = detail::knn_all(X.values, params.k);

    ScoreVector out;
    out.spec = spec;
    out.raw_scores.resize(t.dist.size());
    for (std::size_t i = 0; i < t.dist.size(); ++i) out.raw_scores[i] = t.dist[i].back();
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["k"] = params.k;
    return out;
}

ScoreVector score_lof(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<LofParams>(spec.params);
    const int k = params.k;
    auto t = detail::knn_all(X.values, k);
    const std::size_t n = t.dist.size();

    // local reachability density; the floor keeps co-located duplicates
    // finite (their LOF then comes out as 1)
    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int m = 0; m < k; ++m) {
            int q = t.idx[i][static_cast<std::size_t>(m)];
            sum += std::max(t.dist[static_cast<std::size_t>(q)].back(),
                            t.dist[i][static_cast<std::size_t>(m)]);
        }
        lrd[i] = 1.0 / std::max(sum / k, 1e-12);
    }

    ScoreVector out;
    out.spec = spec;
    out.raw_scores.resize(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int m = 0; m < k; ++m)
            sum += lrd[static_cast<std::size_t>(t.idx[i][static_cast<std::size_t>(m)])];
        out.raw_scores[i] = sum / k / lrd[i];
        labels[i] = out.raw_scores[i] > params.label_threshold ? 1 : 0;
    }
    out.native_labels = std::move(labels);
    out.fit_metadata["k"] = k;
    out.fit_metadata["label_threshold"] = params.label_threshold;
    return out;
}

}  // namespace lobsig
