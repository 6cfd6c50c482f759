#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lobsig/backtest.hpp"
#include "lobsig/detectors/detector.hpp"
#include "lobsig/lob_record.hpp"
#include "lobsig/signal.hpp"

namespace lobsig {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything that determines a run. Serialized into manifest.json;
/// re-running an identical manifest reproduces identical bytes.
struct PipelineConfig {
    std::optional<std::string> input_path;       // exactly one of these two
    std::optional<SyntheticConfig> synthetic;
    int levels = 10;
    std::vector<DetectorSpec> specs;
    LabelMode mode = LabelMode::Percentile;
    double percentile = 95.0;  // in percent
    FeatureParams features;
    BacktestConfig backtest;
    std::uint64_t seed = 42;
};

struct DetectorRun {
    DetectorSpec spec;
    std::string error;  // nonempty = this slot failed
    std::optional<ScoreVector> scores;
    std::optional<SignalSeries> signals;
    std::optional<BacktestResult> backtest;

    bool ok() const { return error.empty(); }
};

struct PipelineResult {
    LabeledSeries series;
    FeatureMatrix features;
    std::vector<DetectorRun> detectors;
    std::optional<double> benchmark_profit;
    std::string benchmark_error;  // set when buy-and-hold was not computable
    std::uint64_t input_hash = 0;
};

/// Loads or generates the data, builds features, and runs every detector
/// through scoring, signals, and backtest. Per-detector failures land in the
/// slot's error string; data or feature failures throw.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Writes manifest.json, summary.csv, and per_detector/<kind>/{scores,
/// signals,ledger,equity}.csv under out_dir. Creates directories as needed.
void write_run_artifacts(const PipelineConfig& config, const PipelineResult& result,
                         const std::filesystem::path& out_dir);

/// One summary.csv row (also the compare-table row).
struct SummaryRow {
    std::string model;
    long long long_trades = 0;
    long long short_trades = 0;
    double cum_profit = 0.0;
    double gain_pct = 0.0;
    std::optional<double> win_rate;
    double total_fees = 0.0;
    std::optional<double> profit_per_trade;
};

std::vector<SummaryRow> summarize(const PipelineResult& result);

/// Reads summary.csv rows back from completed run directories, deduplicates
/// identical rows, and ranks by gain percent (descending). Also emits
/// plot-ready equity and bar data when out_dir is given.
std::vector<SummaryRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs,
                                     const std::optional<std::filesystem::path>& out_dir);

/// FNV-1a 64-bit over a byte stream; the manifest records it for the input.
std::uint64_t fnv1a64(const void* data, std::size_t size);

/// Shortest round-trip decimal form of a double (byte-stable across runs).
std::string format_double(double v);

}  // namespace lobsig
