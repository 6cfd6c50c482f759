#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lobsig/detectors/detector.hpp"
#include "lobsig/features.hpp"

namespace lobsig {

enum class LabelMode { Percentile, Native };
enum class Direction { Long, Short };

const char* to_string(LabelMode m);
const char* to_string(Direction d);
std::optional<LabelMode> label_mode_from_string(const std::string& name);

/// A directed trade trigger: anomaly flag plus the sign of recent momentum.
/// `bar` indexes the source bar in the full record series.
struct TradeSignal {
    TimestampMs timestamp = 0;
    Direction direction = Direction::Long;
    double source_score = 0.0;
    double momentum = 0.0;
    std::size_t bar = 0;
};

/// Min-max rescaling to [0, 1]. Throws UndefinedValueError when all values
/// coincide (constant scores carry no ranking information).
std::vector<double> normalize_scores(std::span<const double> raw);

struct ThresholdResult {
    double value = 0.0;
    bool nearest_rank_fallback = false;  // set when n * (1 - q) < 1
};

/// Linear-interpolation percentile of the scores; falls back to nearest-rank
/// when the sample is too small to resolve the requested tail.
ThresholdResult compute_threshold(std::span<const double> scores, double q);

/// Strict comparison: flag = score > tau. Ties at tau are not flagged.
std::vector<std::uint8_t> binarize(std::span<const double> scores, double tau);

/// One signal per flagged row with nonzero momentum: short when momentum is
/// positive, long when negative (mean reversion against the recent move).
std::vector<TradeSignal> generate_signals(std::span<const std::uint8_t> flags,
                                          std::span<const double> momentum,
                                          std::span<const TimestampMs> timestamps,
                                          std::span<const double> scores,
                                          std::span<const std::size_t> bars);

struct SignalSeries {
    DetectorSpec detector;
    LabelMode mode = LabelMode::Percentile;
    std::vector<double> normalized_scores;
    double threshold = 0.0;  // -inf when flags come from native labels
    bool threshold_fallback = false;
    std::vector<std::uint8_t> flags;
    std::vector<TradeSignal> signals;
};

/// Full score-to-signal pass for one detector. `percentile` is in percent
/// (95 means the 95th percentile). In native mode the detector's own labels
/// drive the flags and the threshold is recorded as -infinity.
SignalSeries build_signal_series(const FeatureMatrix& X, const ScoreVector& scores,
                                 LabelMode mode, double percentile = 95.0);

}  // namespace lobsig
