#include "lobsig/signal.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "lobsig/errors.hpp"
#include "lobsig/stats.hpp"

namespace lobsig {

const char* to_string(LabelMode m) {
    switch (m) {
        case LabelMode::Percentile: return "percentile";
        case LabelMode::Native: return "native";
    }
    throw std::logic_error("unknown label mode");
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::Long: return "long";
        case Direction::Short: return "short";
    }
    throw std::logic_error("unknown direction");
}

std::optional<LabelMode> label_mode_from_string(const std::string& name) {
    if (name == "percentile") return LabelMode::Percentile;
    if (name == "native") return LabelMode::Native;
    return std::nullopt;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
    if (raw.size() < 2) throw ValidationError("score normalization needs at least 2 values");
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo))
        throw UndefinedValueError("all scores are identical; min-max normalization is undefined");
    std::vector<double> out(raw.size());
    const double range = hi - lo;
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / range;
    return out;
}

ThresholdResult compute_threshold(std::span<const double> scores, double q) {
    if (scores.empty()) throw ValidationError("cannot take a percentile of an empty score vector");
    if (!(q >= 0.0) || q > 1.0) throw ConfigError("percentile must lie in [0, 1]");
    ThresholdResult r;
    if (static_cast<double>(scores.size()) * (1.0 - q) < 1.0 && q < 1.0) {
        // too few samples to interpolate the requested tail
        r.nearest_rank_fallback = true;
        r.value = percentile_nearest_rank(scores, q);
    } else {
        r.value = percentile_linear(scores, q);
    }
    return r;
}

std::vector<std::uint8_t> binarize(std::span<const double> scores, double tau) {
    std::vector<std::uint8_t> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > tau ? 1 : 0;
    return flags;
}

std::vector<TradeSignal> generate_signals(std::span<const std::uint8_t> flags,
                                          std::span<const double> momentum,
                                          std::span<const TimestampMs> timestamps,
                                          std::span<const double> scores,
                                          std::span<const std::size_t> bars) {
    if (flags.size() != momentum.size() || flags.size() != timestamps.size() ||
        flags.size() != scores.size() || flags.size() != bars.size())
        throw ValidationError("signal inputs are not aligned");
    std::vector<TradeSignal> signals;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (!flags[i]) continue;
        const double m = momentum[i];
        if (m == 0.0) continue;  // no direction to lean against
        TradeSignal s;
        s.timestamp = timestamps[i];
        s.direction = m > 0.0 ? Direction::Short : Direction::Long;
        s.source_score = scores[i];
        s.momentum = m;
        s.bar = bars[i];
        signals.push_back(s);
    }
    return signals;
}

SignalSeries build_signal_series(const FeatureMatrix& X, const ScoreVector& scores,
                                 LabelMode mode, double percentile) {
    const std::size_t n = scores.raw_scores.size();
    if (n != static_cast<std::size_t>(X.rows()))
        throw ValidationError("score vector does not match the feature matrix");

    SignalSeries s;
    s.detector = scores.spec;
    s.mode = mode;
    s.normalized_scores = normalize_scores(scores.raw_scores);

    if (mode == LabelMode::Percentile) {
        if (!(percentile > 0.0) || percentile >= 100.0)
            throw ConfigError("percentile must lie in (0, 100)");
        ThresholdResult t = compute_threshold(s.normalized_scores, percentile / 100.0);
        s.threshold = t.value;
        s.threshold_fallback = t.nearest_rank_fallback;
        s.flags = binarize(s.normalized_scores, s.threshold);
    } else {
        if (!scores.native_labels)
            throw ValidationError(std::string("detector ") + to_string(scores.spec.kind) +
                                  " provides no native labels");
        s.threshold = -std::numeric_limits<double>::infinity();
        s.flags = *scores.native_labels;
    }

    std::vector<std::size_t> bars(n);
    for (std::size_t i = 0; i < n; ++i) bars[i] = X.row_record_index[i];
    s.signals = generate_signals(s.flags, X.raw_momentum, X.row_timestamps,
                                 s.normalized_scores, bars);
    return s;
}

}  // namespace lobsig
