#include "lobsig/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace lobsig {

int FeatureParams::warmup() const {
    return std::max({realized_vol_window, imm_vol_window, momentum_window, 1});
}

void FeatureParams::validate() const {
    if (imm_vol_window < 2) throw ConfigError("imm_vol_window must be >= 2");
    if (realized_vol_window < 1) throw ConfigError("realized_vol_window must be >= 1");
    if (depth_levels < 1) throw ConfigError("depth_levels must be >= 1");
    if (momentum_window < 1) throw ConfigError("momentum_window must be >= 1");
}

double compute_spread(const LobRecord& record) {
    return (record.best_ask() - record.best_bid()).to_double();
}

double compute_imbalance(double bid_volume, double ask_volume) {
    const double total = bid_volume + ask_volume;
    if (total <= 0.0) throw UndefinedValueError("imbalance undefined: empty book");
    return (bid_volume - ask_volume) / total;
}

std::pair<double, double> compute_depth(const LobRecord& record, int level_count) {
    if (level_count < 1 || level_count > record.levels())
        throw ConfigError("depth level count out of range");
    double db = 0.0, da = 0.0;
    for (int i = 0; i < level_count; ++i) {
        db += record.bid_sz[i].to_double();
        da += record.ask_sz[i].to_double();
    }
    return {db, da};
}

std::vector<double> compute_inter_arrival(std::span<const TimestampMs> timestamps) {
    if (timestamps.size() < 2) throw ConfigError("need at least 2 timestamps");
    std::vector<double> out;
    out.reserve(timestamps.size() - 1);
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] < timestamps[i - 1]) throw ValidationError("timestamps decrease");
        out.push_back(static_cast<double>(timestamps[i] - timestamps[i - 1]) / 1000.0);
    }
    return out;
}

std::vector<double> immediate_volatility(std::span<const double> closes, int window) {
    if (window < 2) throw ConfigError("immediate volatility window must be >= 2");
    if (closes.size() < static_cast<std::size_t>(window) + 1)
        throw ConfigError("series too short for immediate volatility window");
    std::vector<double> diffs(closes.size() - 1);
    for (std::size_t i = 1; i < closes.size(); ++i) diffs[i - 1] = closes[i] - closes[i - 1];

    std::vector<double> out;
    out.reserve(diffs.size() - window + 1);
    for (std::size_t end = window; end <= diffs.size(); ++end) {
        double mean = 0.0;
        for (std::size_t j = end - window; j < end; ++j) mean += diffs[j];
        mean /= window;
        double ss = 0.0;
        for (std::size_t j = end - window; j < end; ++j) {
            const double d = diffs[j] - mean;
            ss += d * d;
        }
        out.push_back(std::sqrt(ss / window));  // population convention
    }
    return out;
}

std::vector<double> realized_volatility(std::span<const double> closes, int window) {
    if (window < 1) throw ConfigError("realized volatility window must be >= 1");
    if (closes.size() < static_cast<std::size_t>(window) + 1)
        throw ConfigError("series too short for realized volatility window");
    std::vector<double> r2(closes.size() - 1);
    for (std::size_t i = 1; i < closes.size(); ++i) {
        if (closes[i] <= 0.0 || closes[i - 1] <= 0.0)
            throw ValidationError("non-positive price in realized volatility input");
        const double r = std::log(closes[i] / closes[i - 1]);
        r2[i - 1] = r * r;
    }
    std::vector<double> out;
    out.reserve(r2.size() - window + 1);
    for (std::size_t end = window; end <= r2.size(); ++end) {
        double s = 0.0;
        for (std::size_t j = end - window; j < end; ++j) s += r2[j];
        out.push_back(std::sqrt(s));
    }
    return out;
}

double amihud_illiquidity(double signed_return, double volume) {
    if (volume <= 0.0) throw UndefinedValueError("Amihud ratio undefined: zero volume");
    return std::abs(signed_return) / volume;
}

std::vector<double> compute_momentum(std::span<const double> closes, int window) {
    if (window < 1) throw ConfigError("momentum window must be >= 1");
    if (closes.size() < static_cast<std::size_t>(window) + 1)
        throw ConfigError("series too short for momentum window");
    std::vector<double> out;
    out.reserve(closes.size() - window);
    for (std::size_t t = window; t < closes.size(); ++t)
        out.push_back((closes[t] - closes[t - window]) / closes[t - window]);
    return out;
}

FeatureMatrix build_feature_matrix(const std::vector<LobRecord>& records, const FeatureParams& params) {
    params.validate();
    const int warmup = params.warmup();
    const auto n = records.size();
    if (n <= static_cast<std::size_t>(warmup) + 1)
        throw ConfigError("series too short: need more than " + std::to_string(warmup + 1) + " records");

    std::vector<double> closes(n);
    std::vector<TimestampMs> ts(n);
    for (std::size_t i = 0; i < n; ++i) {
        closes[i] = records[i].close.to_double();
        ts[i] = records[i].ts;
    }

    const auto gaps = compute_inter_arrival(ts);                              // index i-1 for bar i
    const auto imm = immediate_volatility(closes, params.imm_vol_window);     // bar w+i
    const auto rea = realized_volatility(closes, params.realized_vol_window); // bar T+i
    const auto mom = compute_momentum(closes, params.momentum_window);        // bar w_m+i

    static const char* kColNames[] = {"exec_price", "spread",       "imbalance",    "trade_volume",
                                      "bid_depth",  "ask_depth",    "inter_arrival", "immediate_vol",
                                      "realized_vol", "amihud",     "momentum"};
    constexpr int kCols = 11;

    FeatureMatrix out;
    std::vector<std::array<double, kCols>> rows;
    rows.reserve(n - warmup);

    for (std::size_t t = warmup; t < n; ++t) {
        const auto& rec = records[t];
        const double volume = rec.volume.to_double();
        if (volume <= 0.0) {
            out.excluded.push_back({t, "zero volume (Amihud undefined)"});
            continue;
        }
        double vb = 0.0, va = 0.0;
        for (int l = 0; l < rec.levels(); ++l) {
            vb += rec.bid_sz[l].to_double();
            va += rec.ask_sz[l].to_double();
        }
        if (vb + va <= 0.0) {
            out.excluded.push_back({t, "empty book (imbalance undefined)"});
            continue;
        }

        const double r1 = std::log(closes[t] / closes[t - 1]);  // 1-bar log-return
        const auto [db, da] = compute_depth(rec, std::min(params.depth_levels, rec.levels()));

        std::array<double, kCols> row;
        row[0] = closes[t];
        row[1] = compute_spread(rec);
        row[2] = compute_imbalance(vb, va);
        row[3] = volume;
        row[4] = db;
        row[5] = da;
        row[6] = gaps[t - 1];
        row[7] = imm[t - params.imm_vol_window];
        row[8] = rea[t - params.realized_vol_window];
        row[9] = amihud_illiquidity(r1, volume);
        row[10] = (closes[t] - closes[t - params.momentum_window]) / closes[t - params.momentum_window];

        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value at record " + std::to_string(t));

        rows.push_back(row);
        out.row_timestamps.push_back(rec.ts);
        out.row_record_index.push_back(t);
        out.raw_momentum.push_back(row[10]);
        out.raw_close.push_back(closes[t]);
    }

    const auto m = rows.size();
    if (m < 2) throw ConfigError("fewer than 2 usable feature rows");

    // Column-wise z-score with population std; constant columns dropped.
    std::vector<int> keep;
    std::vector<double> means(kCols), stds(kCols);
    for (int j = 0; j < kCols; ++j) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[j];
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (const auto& r : rows) {
            const double d = r[j] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(m));
        means[j] = mean;
        stds[j] = sd;
        if (sd > 1e-12 * std::max(1.0, std::abs(mean)))
            keep.push_back(j);
        else
            out.dropped_cols.push_back(kColNames[j]);
    }
    if (keep.empty()) throw ValidationError("all feature columns are constant");

    out.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(keep.size()));
    out.col_means.resize(static_cast<Eigen::Index>(keep.size()));
    out.col_stds.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const int j = keep[c];
        out.col_names.push_back(kColNames[j]);
        out.col_means[static_cast<Eigen::Index>(c)] = means[j];
        out.col_stds[static_cast<Eigen::Index>(c)] = stds[j];
        for (std::size_t i = 0; i < m; ++i)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                (rows[i][j] - means[j]) / stds[j];
    }
    return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open file for writing: " + path.string());
    out << "ts";
    for (const auto& c : m.col_names) out << ',' << c;
    out << '\n';
    char buf[32];
    for (int i = 0; i < m.rows(); ++i) {
        out << m.row_timestamps[static_cast<std::size_t>(i)];
        for (int j = 0; j < m.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), m.values(i, j));
            out << ',' << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

}  // namespace lobsig
