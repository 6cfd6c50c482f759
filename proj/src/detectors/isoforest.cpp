#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "detail.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/rng.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

// expected path length of an unsuccessful BST search among m points
double avg_path(int m) {
    if (m <= 1) return 0.0;
    if (m == 2) return 1.0;
    return 2.0 * (std::log(static_cast<double>(m - 1)) + std::numbers::egamma) -
           2.0 * (m - 1) / static_cast<double>(m);
}

struct Node {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;
};

struct Tree {
    std::vector<Node> nodes;
};

struct Frame {
    int node;
    int begin;
    int end;
    int depth;
};

Tree grow_tree(const detail::FlatRows& F, std::vector<int>& rows, int height_limit, Rng& rng) {
    Tree tree;
    tree.nodes.reserve(2 * rows.size());
    tree.nodes.emplace_back();
    std::vector<Frame> stack{{0, 0, static_cast<int>(rows.size()), 0}};
    std::vector<int> eligible;
    eligible.reserve(static_cast<std::size_t>(F.p));

    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        Node& node = tree.nodes[static_cast<std::size_t>(f.node)];
        node.size = f.end - f.begin;
        if (node.size <= 1 || f.depth >= height_limit) continue;

        eligible.clear();
        for (int d = 0; d < F.p; ++d) {
            double lo = F.row(rows[static_cast<std::size_t>(f.begin)])[d];
            double hi = lo;
            for (int r = f.begin + 1; r < f.end; ++r) {
                double v = F.row(rows[static_cast<std::size_t>(r)])[d];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi > lo) eligible.push_back(d);
        }
        if (eligible.empty()) continue;

        int d = eligible[static_cast<std::size_t>(
            rng.uniform_index(static_cast<std::uint64_t>(eligible.size())))];
        double lo = F.row(rows[static_cast<std::size_t>(f.begin)])[d];
        double hi = lo;
        for (int r = f.begin + 1; r < f.end; ++r) {
            double v = F.row(rows[static_cast<std::size_t>(r)])[d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double split = lo + rng.uniform() * (hi - lo);

        auto mid_it = std::stable_partition(
            rows.begin() + f.begin, rows.begin() + f.end,
            [&](int row) { return F.row(row)[d] < split; });
        int mid = static_cast<int>(mid_it - rows.begin());

        int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        int right = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        Node& parent = tree.nodes[static_cast<std::size_t>(f.node)];  // re-fetch: vector grew
        parent.feature = d;
        parent.split = split;
        parent.left = left;
        parent.right = right;
        stack.push_back({right, mid, f.end, f.depth + 1});
        stack.push_back({left, f.begin, mid, f.depth + 1});
    }
    return tree;
}

double path_length(const Tree& tree, const double* x) {
    int node = 0;
    int depth = 0;
    for (;;) {
        const Node& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.feature < 0) return depth + avg_path(nd.size);
        node = x[nd.feature] < nd.split ? nd.left : nd.right;
        ++depth;
    }
}

}  // namespace

ScoreVector score_isolation_forest(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<IsofParams>(spec.params);
    const auto& M = X.values;
    const int n = static_cast<int>(M.rows());
    if (params.n_trees < 1) throw ConfigError("isolation forest needs at least one tree");
    if (params.subsample < 2) throw ConfigError("isolation forest subsample must be at least 2");
    if (n < 2) throw ValidationError("isolation forest needs at least 2 rows");
    const int psi = std::min(params.subsample, n);
    const int height_limit =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

    const detail::FlatRows F = detail::flatten_rows(M);
    const std::vector<int> order = canonical_order(M);

    std::vector<Tree> forest;
    forest.reserve(static_cast<std::size_t>(params.n_trees));
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::vector<int> rows;
    for (int t = 0; t < params.n_trees; ++t) {
        // subsample in canonical-rank space so tree structure depends only on
        // row content, then hand the tree actual row indices
        Rng rng(mix64(spec.seed, static_cast<std::uint64_t>(t) + 1));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < psi; ++i) {
            int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        std::vector<int> ranks(pool.begin(), pool.begin() + psi);
        std::sort(ranks.begin(), ranks.end());
        rows.clear();
        for (int r : ranks) rows.push_back(order[static_cast<std::size_t>(r)]);
        forest.push_back(grow_tree(F, rows, height_limit, rng));
    }

    const double norm = avg_path(psi);
    std::vector<double> scores(static_cast<std::size_t>(n));
    parallel_for(n, [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            double total = 0.0;
            for (const Tree& tree : forest) total += path_length(tree, F.row(i));
            double mean_path = total / params.n_trees;
            scores[static_cast<std::size_t>(i)] = std::exp2(-mean_path / norm);
        }
    });

    ScoreVector out;
    out.spec = spec;
    out.raw_scores = std::move(scores);
    out.native_labels = detail::labels_above_quantile(out.raw_scores, params.native_quantile);
    out.fit_metadata["trees"] = params.n_trees;
    out.fit_metadata["subsample"] = psi;
    out.fit_metadata["height_limit"] = height_limit;
    return out;
}

}  // namespace lobsig
