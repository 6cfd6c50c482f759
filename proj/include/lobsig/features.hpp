#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/lob_record.hpp"

namespace lobsig {

/// Rolling-window settings for feature construction. All windows are
/// trailing; the warm-up equals the longest window.
struct FeatureParams {
    int imm_vol_window = 10;       // w: std of price differences
    int realized_vol_window = 30;  // T: sqrt of summed squared log-returns
    int depth_levels = 5;          // l: cumulative book depth
    int momentum_window = 5;       // w_m: simple return lookback

    int warmup() const;
    void validate() const;
};

struct ExcludedRow {
    std::size_t record_index;
    std::string reason;
};

/// Standardized n-by-p observation matrix plus the metadata needed to map
/// rows back to source records. Immutable after construction.
struct FeatureMatrix {
    Eigen::MatrixXd values;  // z-scored, constant columns dropped
    std::vector<std::string> col_names;
    Eigen::VectorXd col_means;  // pre-standardization, retained columns
    Eigen::VectorXd col_stds;   // population convention
    std::vector<std::string> dropped_cols;
    std::vector<TimestampMs> row_timestamps;
    std::vector<std::size_t> row_record_index;
    std::vector<double> raw_momentum;  // unstandardized, for trade direction
    std::vector<double> raw_close;     // unstandardized, for backtest prices
    std::vector<ExcludedRow> excluded;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

/// Best ask minus best bid.
double compute_spread(const LobRecord& record);

/// (V_b - V_a) / (V_b + V_a). Throws UndefinedValueError when both sides
/// are zero.
double compute_imbalance(double bid_volume, double ask_volume);

/// Cumulative bid/ask size over the top `level_count` levels.
std::pair<double, double> compute_depth(const LobRecord& record, int level_count);

/// Gaps between consecutive timestamps, in seconds; length n-1. Throws on
/// decreasing timestamps.
std::vector<double> compute_inter_arrival(std::span<const TimestampMs> timestamps);

/// Rolling population standard deviation of one-bar price differences over
/// the trailing `window` differences; result[i] covers bar window+i.
std::vector<double> immediate_volatility(std::span<const double> closes, int window);

/// Rolling sqrt of summed squared log-returns over the trailing `window`
/// returns; result[i] covers bar window+i. Throws on non-positive prices.
std::vector<double> realized_volatility(std::span<const double> closes, int window);

/// |r| / v. Throws UndefinedValueError when v <= 0.
double amihud_illiquidity(double signed_return, double volume);

/// Simple `window`-bar return; result[i] covers bar window+i.
std::vector<double> compute_momentum(std::span<const double> closes, int window);

/// Assembles, warm-up-truncates and z-score standardizes the full feature
/// set. Rows with undefined Amihud (zero volume) or undefined imbalance
/// (empty book) are excluded and recorded.
FeatureMatrix build_feature_matrix(const std::vector<LobRecord>& records,
                                   const FeatureParams& params = {});

/// Dumps the standardized matrix as CSV: ts,<col_names...>.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);

}  // namespace lobsig
