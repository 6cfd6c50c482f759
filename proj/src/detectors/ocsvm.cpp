#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>
#include <utility>
#include <vector>

#include "detail.hpp"
#include "lobsig/detectors/ocsvm.hpp"
#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {
namespace {

constexpr std::size_t kKernelCacheBytes = 384u << 20;

// On-demand RBF kernel columns with LRU eviction. A column K(:, t) is the
// kernel of every training row against row t.
class KernelCache {
  public:
    KernelCache(const detail::FlatRows& F, double gamma)
        : F_(F), gamma_(gamma), sq_norms_(static_cast<std::size_t>(F.n)) {
        for (int i = 0; i < F_.n; ++i) {
            const double* r = F_.row(i);
            double s = 0.0;
            for (int d = 0; d < F_.p; ++d) s += r[d] * r[d];
            sq_norms_[static_cast<std::size_t>(i)] = s;
        }
        std::size_t col_bytes = static_cast<std::size_t>(F_.n) * sizeof(double);
        capacity_ = std::max<std::size_t>(16, kKernelCacheBytes / std::max<std::size_t>(col_bytes, 1));
    }

    const std::vector<double>& column(int t) {
        auto it = index_.find(t);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        if (index_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        lru_.emplace_front(t, compute(t));
        index_[t] = lru_.begin();
        return lru_.front().second;
    }

  private:
    std::vector<double> compute(int t) const {
        std::vector<double> col(static_cast<std::size_t>(F_.n));
        const double* xt = F_.row(t);
        const double nt = sq_norms_[static_cast<std::size_t>(t)];
        parallel_for(F_.n, [&](int b, int e) {
            for (int s = b; s < e; ++s) {
                const double* xs = F_.row(s);
                double dot = 0.0;
                for (int d = 0; d < F_.p; ++d) dot += xs[d] * xt[d];
                double d2 = sq_norms_[static_cast<std::size_t>(s)] + nt - 2.0 * dot;
                col[static_cast<std::size_t>(s)] = std::exp(-gamma_ * std::max(d2, 0.0));
            }
        });
        return col;
    }

    const detail::FlatRows& F_;
    double gamma_;
    std::vector<double> sq_norms_;
    std::size_t capacity_;
    std::list<std::pair<int, std::vector<double>>> lru_;
    std::unordered_map<int, std::list<std::pair<int, std::vector<double>>>::iterator> index_;
};

}  // namespace

OcsvmModel solve_ocsvm(const Eigen::MatrixXd& X, const OcsvmParams& params) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (!(params.nu > 0.0) || params.nu > 1.0) throw ConfigError("OC-SVM nu must lie in (0, 1]");
    if (!(params.tol > 0.0)) throw ConfigError("OC-SVM tolerance must be positive");
    if (params.max_iter < 1) throw ConfigError("OC-SVM max iterations must be positive");

    OcsvmModel model;
    if (params.gamma > 0.0) {
        model.gamma = params.gamma;
    } else {
        Eigen::VectorXd mean;
        Eigen::MatrixXd cov;
        mean_cov_rows(X, canonical_order(X), mean, cov);
        double total_var = cov.trace();
        model.gamma = total_var > 0.0 ? 1.0 / (p * total_var) : 1.0;
    }

    const detail::FlatRows F = detail::flatten_rows(X);
    KernelCache cache(F, model.gamma);
    const double C = 1.0 / (params.nu * n);
    const std::vector<int> order = canonical_order(X);

    // Start feasible: fill coefficients up to the box bound along the
    // canonical row order until the unit budget is spent.
    std::vector<double>& alpha = model.alpha;
    alpha.assign(static_cast<std::size_t>(n), 0.0);
    {
        double budget = 1.0;
        for (int r : order) {
            if (budget <= 0.0) break;
            double a = std::min(C, budget);
            alpha[static_cast<std::size_t>(r)] = a;
            budget -= a;
        }
    }

    std::vector<double> G(static_cast<std::size_t>(n), 0.0);
    for (int r : order) {
        double a = alpha[static_cast<std::size_t>(r)];
        if (a <= 0.0) continue;
        const auto& col = cache.column(r);
        for (int t = 0; t < n; ++t) G[static_cast<std::size_t>(t)] += a * col[static_cast<std::size_t>(t)];
    }

    const double inf = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (model.sweeps = 0; model.sweeps < params.max_iter && !converged; ++model.sweeps) {
        for (int step = 0; step < n; ++step) {
            // maximal violating pair, scanned in canonical order so row
            // shuffles cannot change the chosen content
            int i = -1, j = -1;
            double gi = inf, gj = -inf;
            for (int r : order) {
                double a = alpha[static_cast<std::size_t>(r)];
                double g = G[static_cast<std::size_t>(r)];
                if (a < C && g < gi) {
                    gi = g;
                    i = r;
                }
                if (a > 0.0 && g > gj) {
                    gj = g;
                    j = r;
                }
            }
            if (i < 0 || j < 0 || gj - gi <= params.tol) {
                converged = true;
                break;
            }

            const auto& col_i = cache.column(i);
            const auto& col_j = cache.column(j);
            double denom = 2.0 * (1.0 - col_i[static_cast<std::size_t>(j)]);
            if (denom < 1e-12) denom = 1e-12;
            double delta = (gj - gi) / denom;
            const double room_i = C - alpha[static_cast<std::size_t>(i)];
            const double room_j = alpha[static_cast<std::size_t>(j)];
            if (delta >= std::min(room_i, room_j)) {
                // hit a box bound exactly so the pair leaves the working set
                if (room_i <= room_j) {
                    delta = room_i;
                    alpha[static_cast<std::size_t>(i)] = C;
                    alpha[static_cast<std::size_t>(j)] -= delta;
                } else {
                    delta = room_j;
                    alpha[static_cast<std::size_t>(i)] += delta;
                    alpha[static_cast<std::size_t>(j)] = 0.0;
                }
            } else {
                alpha[static_cast<std::size_t>(i)] += delta;
                alpha[static_cast<std::size_t>(j)] -= delta;
            }
            for (int t = 0; t < n; ++t)
                G[static_cast<std::size_t>(t)] +=
                    delta * (col_i[static_cast<std::size_t>(t)] - col_j[static_cast<std::size_t>(t)]);
            ++model.updates;
        }
    }
    if (!converged)
        throw ConvergenceError("OC-SVM dual solver did not reach tolerance", model.sweeps);

    // offset: average gradient over free support vectors, else the midpoint
    // of the KKT bracket
    double free_sum = 0.0;
    int free_count = 0;
    double at_bound_max = -inf, at_zero_min = inf;
    for (int r : order) {
        double a = alpha[static_cast<std::size_t>(r)];
        double g = G[static_cast<std::size_t>(r)];
        if (a > 0.0 && a < C) {
            free_sum += g;
            ++free_count;
        } else if (a >= C) {
            at_bound_max = std::max(at_bound_max, g);
        } else {
            at_zero_min = std::min(at_zero_min, g);
        }
    }
    if (free_count > 0) {
        model.rho = free_sum / free_count;
    } else if (at_bound_max > -inf && at_zero_min < inf) {
        model.rho = 0.5 * (at_bound_max + at_zero_min);
    } else if (at_bound_max > -inf) {
        model.rho = at_bound_max;
    } else {
        model.rho = at_zero_min;
    }

    model.decision.resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        model.decision[static_cast<std::size_t>(t)] = G[static_cast<std::size_t>(t)] - model.rho;
    double obj = 0.0;
    for (int r : order) obj += alpha[static_cast<std::size_t>(r)] * G[static_cast<std::size_t>(r)];
    model.objective = 0.5 * obj;
    for (int t = 0; t < n; ++t) {
        if (alpha[static_cast<std::size_t>(t)] > 0.0) ++model.support_count;
        if (model.decision[static_cast<std::size_t>(t)] < -params.tol) ++model.margin_violations;
    }
    return model;
}

ScoreVector score_ocsvm(const FeatureMatrix& X, const DetectorSpec& spec) {
    const auto& params = std::get<OcsvmParams>(spec.params);
    OcsvmModel model = solve_ocsvm(X.values, params);

    ScoreVector out;
    out.spec = spec;
    out.raw_scores.resize(model.decision.size());
    std::vector<std::uint8_t> labels(model.decision.size());
    for (std::size_t i = 0; i < model.decision.size(); ++i) {
        out.raw_scores[i] = -model.decision[i];
        labels[i] = out.raw_scores[i] > 0.0 ? 1 : 0;
    }
    out.native_labels = std::move(labels);
    out.fit_metadata["gamma"] = model.gamma;
    out.fit_metadata["rho"] = model.rho;
    out.fit_metadata["objective"] = model.objective;
    out.fit_metadata["sweeps"] = static_cast<double>(model.sweeps);
    out.fit_metadata["updates"] = static_cast<double>(model.updates);
    out.fit_metadata["support_count"] = model.support_count;
    out.fit_metadata["margin_violations"] = model.margin_violations;
    return out;
}

}  // namespace lobsig
