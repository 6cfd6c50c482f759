#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lobsig/csv.hpp"
#include "lobsig/lob_record.hpp"
#include "lobsig/rng.hpp"

namespace lobsig {

const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::VolumeSpike: return "volume_spike";
        case AnomalyKind::VolumeDust: return "volume_dust";
        case AnomalyKind::TimeGap: return "time_gap";
        case AnomalyKind::DepthWithdrawal: return "depth_withdrawal";
        case AnomalyKind::DepthInflation: return "depth_inflation";
        case AnomalyKind::VolatilityShock: return "volatility_shock";
        case AnomalyKind::AnomalousCalm: return "anomalous_calm";
    }
    return "?";
}

std::optional<AnomalyKind> anomaly_kind_from_string(const std::string& s) {
    static const std::pair<const char*, AnomalyKind> table[] = {
        {"volume_spike", AnomalyKind::VolumeSpike},
        {"volume_dust", AnomalyKind::VolumeDust},
        {"time_gap", AnomalyKind::TimeGap},
        {"depth_withdrawal", AnomalyKind::DepthWithdrawal},
        {"depth_inflation", AnomalyKind::DepthInflation},
        {"volatility_shock", AnomalyKind::VolatilityShock},
        {"anomalous_calm", AnomalyKind::AnomalousCalm},
    };
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    return std::nullopt;
}

void SyntheticConfig::validate() const {
    if (n_records < 2) throw ConfigError("n_records must be >= 2");
    if (base_price <= 0.0) throw ConfigError("base_price must be > 0");
    if (base_volatility < 0.0) throw ConfigError("base_volatility must be >= 0");
    if (levels < 1) throw ConfigError("levels must be >= 1");
    double total_rate = 0.0;
    for (const auto& a : anomalies) {
        if (a.rate < 0.0) throw ConfigError("anomaly rate must be >= 0");
        if (a.magnitude <= 0.0) throw ConfigError("anomaly magnitude must be > 0");
        total_rate += a.rate;
    }
    if (total_rate >= 0.5) throw ConfigError("anomaly rates must sum to < 0.5");
}

// ---------------------------------------------------------------------------
// Record-level invariant checks, shared by the parser and validate_series.

namespace {

void check_record(const LobRecord& r, std::vector<std::string>& out) {
    if (!r.low.is_positive()) out.push_back("low must be positive");
    if (r.low > r.high) out.push_back("low exceeds high");
    if (r.open < r.low || r.open > r.high) out.push_back("open outside [low, high]");
    if (r.close < r.low || r.close > r.high) out.push_back("close outside [low, high]");
    if (r.volume.is_negative()) out.push_back("negative volume");

    const int L = r.levels();
    for (int i = 0; i < L; ++i) {
        if (!r.bid_px[i].is_positive()) out.push_back("bid price not positive at level " + std::to_string(i + 1));
        if (!r.ask_px[i].is_positive()) out.push_back("ask price not positive at level " + std::to_string(i + 1));
        if (r.bid_sz[i].is_negative()) out.push_back("negative bid size at level " + std::to_string(i + 1));
        if (r.ask_sz[i].is_negative()) out.push_back("negative ask size at level " + std::to_string(i + 1));
        if (i > 0) {
            if (r.bid_px[i] >= r.bid_px[i - 1])
                out.push_back("bid prices not strictly decreasing at level " + std::to_string(i + 1));
            if (r.ask_px[i] <= r.ask_px[i - 1])
                out.push_back("ask prices not strictly increasing at level " + std::to_string(i + 1));
        }
    }
    if (L > 0 && r.best_ask() < r.best_bid()) out.push_back("crossed book: best ask below best bid");
}

}  // namespace

std::vector<Violation> validate_series(const std::vector<LobRecord>& records) {
    std::vector<Violation> violations;
    std::vector<std::string> local;
    for (std::size_t i = 0; i < records.size(); ++i) {
        local.clear();
        check_record(records[i], local);
        if (i > 0 && records[i].ts <= records[i - 1].ts)
            local.push_back("timestamp not strictly increasing");
        for (auto& w : local) violations.push_back({i, std::move(w)});
    }
    return violations;
}

// ---------------------------------------------------------------------------
// CSV

std::string lob_csv_header(int levels) {
    std::string h = "ts,open,high,low,close,volume";
    for (int i = 1; i <= levels; ++i)
        h += ",bid_px_" + std::to_string(i) + ",bid_sz_" + std::to_string(i);
    for (int i = 1; i <= levels; ++i)
        h += ",ask_px_" + std::to_string(i) + ",ask_sz_" + std::to_string(i);
    return h;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

TimestampMs parse_ts(std::string_view s, std::size_t line_no) {
    if (s.empty()) throw ParseError(line_no, "empty timestamp");
    TimestampMs v = 0;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-') {
        neg = true;
        i = 1;
    }
    if (i == s.size()) throw ParseError(line_no, "bad timestamp");
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw ParseError(line_no, "bad timestamp: '" + std::string(s) + "'");
        v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
}

}  // namespace

std::vector<LobRecord> parse_csv(const std::filesystem::path& path, int levels) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    if (levels < 1) throw ConfigError("levels must be >= 1");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != lob_csv_header(levels))
        throw ParseError(1, "header does not match the " + std::to_string(levels) + "-level schema");

    const std::size_t expected_fields = 6 + 4 * static_cast<std::size_t>(levels);
    std::vector<LobRecord> records;
    std::size_t line_no = 1;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields)
            throw ParseError(line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                          std::to_string(fields.size()));
        LobRecord r;
        try {
            r.ts = parse_ts(fields[0], line_no);
            r.open = Fixed8::parse(fields[1]);
            r.high = Fixed8::parse(fields[2]);
            r.low = Fixed8::parse(fields[3]);
            r.close = Fixed8::parse(fields[4]);
            r.volume = Fixed8::parse(fields[5]);
            r.bid_px.reserve(levels);
            std::size_t f = 6;
            for (int i = 0; i < levels; ++i) {
                r.bid_px.push_back(Fixed8::parse(fields[f++]));
                r.bid_sz.push_back(Fixed8::parse(fields[f++]));
            }
            for (int i = 0; i < levels; ++i) {
                r.ask_px.push_back(Fixed8::parse(fields[f++]));
                r.ask_sz.push_back(Fixed8::parse(fields[f++]));
            }
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }

        problems.clear();
        check_record(r, problems);
        if (!problems.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": " + problems.front());
        if (!records.empty()) {
            if (r.ts == records.back().ts)
                throw ValidationError("line " + std::to_string(line_no) + ": duplicate timestamp");
            if (r.ts < records.back().ts)
                throw ValidationError("line " + std::to_string(line_no) + ": timestamp decreases");
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::string serialize_csv(const std::vector<LobRecord>& records) {
    const int levels = records.empty() ? 10 : records.front().levels();
    std::string out = lob_csv_header(levels);
    out.push_back('\n');
    for (const auto& r : records) {
        out += std::to_string(r.ts);
        out.push_back(',');
        out += r.open.str();
        out.push_back(',');
        out += r.high.str();
        out.push_back(',');
        out += r.low.str();
        out.push_back(',');
        out += r.close.str();
        out.push_back(',');
        out += r.volume.str();
        for (int i = 0; i < levels; ++i) {
            out.push_back(',');
            out += r.bid_px[i].str();
            out.push_back(',');
            out += r.bid_sz[i].str();
        }
        for (int i = 0; i < levels; ++i) {
            out.push_back(',');
            out += r.ask_px[i].str();
            out.push_back(',');
            out += r.ask_sz[i].str();
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<LobRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open file for writing: " + path.string());
    out << serialize_csv(records);
}

// ---------------------------------------------------------------------------
// Synthetic generator

namespace {

constexpr TimestampMs kStartTs = 1'600'000'000'000;  // fixed epoch for reproducibility
constexpr std::int64_t kBarMs = 60'000;

Fixed8 quantize(double v) { return Fixed8::from_double(v); }

}  // namespace

LabeledSeries generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    Rng rng(config.seed);

    LabeledSeries out;
    const std::size_t n = config.n_records;
    out.records.reserve(n);
    out.labels.assign(n, 0);
    out.kinds.assign(n, std::nullopt);

    // Cumulative rate table for the single per-record anomaly draw.
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& a : config.anomalies) {
        acc += a.rate;
        cum.push_back(acc);
    }

    double prev_close = config.base_price;
    Fixed8 prev_close_q = quantize(prev_close);
    TimestampMs ts = kStartTs;
    std::size_t calm_remaining = 0;

    for (std::size_t i = 0; i < n; ++i) {
        std::optional<AnomalyKind> kind;
        double magnitude = 1.0;
        if (calm_remaining > 0) {
            kind = AnomalyKind::AnomalousCalm;
            --calm_remaining;
        } else {
            const double u = rng.uniform();
            for (std::size_t a = 0; a < cum.size(); ++a) {
                if (u < cum[a]) {
                    kind = config.anomalies[a].kind;
                    magnitude = config.anomalies[a].magnitude;
                    break;
                }
            }
            if (kind == AnomalyKind::AnomalousCalm)
                calm_remaining = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(magnitude))) - 1;
        }

        // Timestamp: gap anomalies widen the interval into this record.
        if (i > 0) {
            std::int64_t interval = kBarMs;
            if (kind == AnomalyKind::TimeGap)
                interval = std::max<std::int64_t>(1, std::llround(static_cast<double>(kBarMs) * magnitude));
            ts += interval;
        }

        // Geometric walk step. The RNG draw happens every bar so injections
        // do not shift the stream consumed by later bars.
        const double z = rng.normal();
        double ret = config.base_volatility * z;
        if (kind == AnomalyKind::VolatilityShock) ret *= magnitude;
        if (kind == AnomalyKind::AnomalousCalm) ret = 0.0;
        const double close = prev_close * std::exp(ret);

        const double zh = std::abs(rng.normal());
        const double zl = std::abs(rng.normal());
        double high = std::max(prev_close, close);
        double low = std::min(prev_close, close);
        if (kind != AnomalyKind::AnomalousCalm) {
            high *= 1.0 + 0.25 * config.base_volatility * zh;
            low /= 1.0 + 0.25 * config.base_volatility * zl;
        }

        double volume = 100.0 * std::exp(0.5 * rng.normal());
        if (kind == AnomalyKind::VolumeSpike) volume *= magnitude;
        if (kind == AnomalyKind::VolumeDust) volume /= magnitude;

        LobRecord r;
        r.ts = ts;
        r.open = prev_close_q;
        r.close = quantize(close);
        r.high = std::max(quantize(high), std::max(r.open, r.close));
        r.low = std::min(quantize(low), std::min(r.open, r.close));
        if (!r.low.is_positive()) r.low = Fixed8::from_raw(1);
        r.volume = quantize(volume);

        // Book: spread around the close, fixed per-level price step,
        // lognormal sizes increasing slightly with depth.
        const double spread = close * 2e-4 * (0.75 + 0.5 * rng.uniform());
        const double step = spread * (0.8 + 0.4 * rng.uniform());
        double size_scale = 1.0;
        if (kind == AnomalyKind::DepthWithdrawal) size_scale = 1.0 / magnitude;
        if (kind == AnomalyKind::DepthInflation) size_scale = magnitude;
        r.bid_px.reserve(config.levels);
        for (int l = 0; l < config.levels; ++l) {
            const double bid = close - spread / 2 - l * step;
            const double ask = close + spread / 2 + l * step;
            const double bsz = 50.0 * (1.0 + 0.15 * l) * std::exp(0.4 * rng.normal()) * size_scale;
            const double asz = 50.0 * (1.0 + 0.15 * l) * std::exp(0.4 * rng.normal()) * size_scale;
            r.bid_px.push_back(quantize(std::max(bid, (config.levels - l) * 1e-8)));
            r.bid_sz.push_back(quantize(bsz));
            r.ask_px.push_back(quantize(ask));
            r.ask_sz.push_back(quantize(asz));
        }

        out.records.push_back(std::move(r));
        out.labels[i] = kind.has_value() ? 1 : 0;
        out.kinds[i] = kind;

        prev_close = close;
        prev_close_q = out.records.back().close;
    }
    return out;
}

}  // namespace lobsig
