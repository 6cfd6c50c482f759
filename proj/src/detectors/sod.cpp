#include <algorithm>
#include <cmath>
#include <vector>

#include "detail.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

// reference-set candidate, ordered by shared-neighbor similarity (more
// shared neighbors first), then distance, then canonical rank
struct Candidate {
    int shared;
    double dist_sq;
    int rank;
    int row;
    bool operator<(const Candidate& o) const {
        if (shared != o.shared) return shared > o.shared;
        if (dist_sq != o.dist_sq) return dist_sq < o.dist_sq;
        return rank < o.rank;
    }
};

int count_shared(const std::vector<int>& a, const std::vector<int>& b) {
    int count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (a[i] > b[j]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

}  // namespace

ScoreVector score_sod(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<SodParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    const int p = static_cast<int>(M.cols());
    detail::require_k_below_n(params.snn_k, n, "shared-neighbor count");
    detail::require_k_below_n(params.ref_size, n, "reference-set size");
    if (!(params.variance_frac > 0.0))
        throw ConfigError("SOD variance fraction must be positive");
    const int l = params.ref_size;

    auto t = detail::knn_all(M, params.snn_k);
    std::vector<std::vector<int>> nbr_sorted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nbr_sorted[static_cast<std::size_t>(i)] = t.idx[static_cast<std::size_t>(i)];
        std::sort(nbr_sorted[static_cast<std::size_t>(i)].begin(),
                  nbr_sorted[static_cast<std::size_t>(i)].end());
    }

    const std::vector<int> rank = canonical_rank(M);
    const detail::FlatRows F = detail::flatten_rows(M);
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);

    parallel_for(n, [&](int bgn, int end) {
        std::vector<Candidate> heap;  // bounded max-heap under Candidate order
        heap.reserve(static_cast<std::size_t>(l) + 1);
        std::vector<int> ref;
        std::vector<double> mean(static_cast<std::size_t>(p));
        std::vector<double> var(static_cast<std::size_t>(p));
        for (int i = bgn; i < end; ++i) {
            heap.clear();
            const auto& ni = nbr_sorted[static_cast<std::size_t>(i)];
            for (int q = 0; q < n; ++q) {
                if (q == i) continue;
                Candidate c{count_shared(ni, nbr_sorted[static_cast<std::size_t>(q)]),
                            detail::dist_sq(F, i, q), rank[static_cast<std::size_t>(q)], q};
                if (static_cast<int>(heap.size()) < l) {
                    heap.push_back(c);
                    std::push_heap(heap.begin(), heap.end());
                } else if (c < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = c;
                    std::push_heap(heap.begin(), heap.end());
                }
            }

            // accumulate reference statistics in canonical order
            ref.clear();
            for (const Candidate& c : heap) ref.push_back(c.row);
            std::sort(ref.begin(), ref.end(), [&](int a, int b) {
                return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
            });
            std::fill(mean.begin(), mean.end(), 0.0);
            std::fill(var.begin(), var.end(), 0.0);
            for (int r : ref) {
                const double* x = F.row(r);
                for (int d = 0; d < p; ++d) mean[static_cast<std::size_t>(d)] += x[d];
            }
            for (int d = 0; d < p; ++d) mean[static_cast<std::size_t>(d)] /= l;
            for (int r : ref) {
                const double* x = F.row(r);
                for (int d = 0; d < p; ++d) {
                    double diff = x[d] - mean[static_cast<std::size_t>(d)];
                    var[static_cast<std::size_t>(d)] += diff * diff;
                }
            }
            double total_var = 0.0;
            for (int d = 0; d < p; ++d) {
                var[static_cast<std::size_t>(d)] /= l;
                total_var += var[static_cast<std::size_t>(d)];
            }

            // relevant subspace: features along which the reference set is
            // unusually tight
            const double threshold = params.variance_frac * total_var / p;
            double dist = 0.0;
            int dims = 0;
            const double* xi = F.row(i);
            for (int d = 0; d < p; ++d) {
                if (var[static_cast<std::size_t>(d)] < threshold) {
                    double diff = xi[d] - mean[static_cast<std::size_t>(d)];
                    dist += diff * diff;
                    ++dims;
                }
            }
            scores[static_cast<std::size_t>(i)] =
                dims > 0 ? std::sqrt(dist / dims) : 0.0;
        }
    });

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = std::move(scores);
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["ref_size"] = l;
    out.fit_metadata["snn_k"] = params.snn_k;
    return out;
}

}  // namespace lobsig
