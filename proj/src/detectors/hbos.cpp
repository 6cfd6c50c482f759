#include <algorithm>
#include <cmath>
#include <vector>

#include "detail.hpp"
#include "lobsig/errors.hpp"

namespace lobsig {

ScoreVector score_hbos(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<HbosParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    const int p = static_cast<int>(M.cols());
    if (params.bins < 0) throw ConfigError("HBOS bin count cannot be negative");
    if (!(params.density_floor > 0.0)) throw ConfigError("HBOS density floor must be positive");
    const int bins = params.bins > 0
                         ? params.bins
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));

    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(bins));
    std::vector<int> bin_of(static_cast<std::size_t>(n));
    for (int j = 0; j < p; ++j) {
        const double lo = M.col(j).minCoeff();
        const double hi = M.col(j).maxCoeff();
        if (!(hi > lo)) continue;  // constant column: unit mass, log(1) = 0
        const double width = (hi - lo) / bins;

        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            int b = static_cast<int>(std::floor((M(i, j) - lo) / width));
            b = std::clamp(b, 0, bins - 1);
            bin_of[static_cast<std::size_t>(i)] = b;
            ++counts[static_cast<std::size_t>(b)];
        }
        for (int i = 0; i < n; ++i) {
            double density =
                (static_cast<double>(counts[static_cast<std::size_t>(bin_of[static_cast<std::size_t>(i)])]) / n) /
                width;
            if (density < params.density_floor) density = params.density_floor;
            scores[static_cast<std::size_t>(i)] += -std::log(density);
        }
    }

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = std::move(scores);
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["bins"] = bins;
    return out;
}

}  // namespace lobsig
