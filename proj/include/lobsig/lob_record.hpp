#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lobsig/errors.hpp"
#include "lobsig/fixed8.hpp"

namespace lobsig {

using TimestampMs = std::int64_t;

/// One timestamped bar: OHLC, traded volume, and L levels of book depth.
/// Level arrays are 0-indexed; index 0 is the top of book.
struct LobRecord {
    TimestampMs ts = 0;
    Fixed8 open, high, low, close;
    Fixed8 volume;
    std::vector<Fixed8> bid_px, bid_sz;
    std::vector<Fixed8> ask_px, ask_sz;

    int levels() const { return static_cast<int>(bid_px.size()); }
    Fixed8 best_bid() const { return bid_px.front(); }
    Fixed8 best_ask() const { return ask_px.front(); }
};

enum class AnomalyKind {
    VolumeSpike,
    VolumeDust,
    TimeGap,
    DepthWithdrawal,
    DepthInflation,
    VolatilityShock,
    AnomalousCalm,
};

const char* to_string(AnomalyKind k);
std::optional<AnomalyKind> anomaly_kind_from_string(const std::string& s);

struct AnomalySpec {
    AnomalyKind kind;
    double rate;       // probability that a record is injected
    double magnitude;  // multiplier; role depends on kind
};

struct SyntheticConfig {
    std::size_t n_records = 20000;
    double base_price = 30000.0;
    double base_volatility = 0.002;  // per-bar log-return stdev
    std::uint64_t seed = 42;
    int levels = 10;
    std::vector<AnomalySpec> anomalies;

    /// Throws ConfigError when rates sum to >= 0.5, a magnitude is
    /// non-positive, or n_records < 2.
    void validate() const;
};

/// Generated series plus per-record ground truth for evaluation.
struct LabeledSeries {
    std::vector<LobRecord> records;
    std::vector<std::uint8_t> labels;  // 1 = injected
    std::vector<std::optional<AnomalyKind>> kinds;
};

LabeledSeries generate_synthetic(const SyntheticConfig& config);

struct Violation {
    std::size_t index;  // record index
    std::string what;
};

/// Collects every invariant violation in the series; empty means clean.
std::vector<Violation> validate_series(const std::vector<LobRecord>& records);

}  // namespace lobsig
