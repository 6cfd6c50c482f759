#include "lobsig/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lobsig/csv.hpp"
#include "lobsig/errors.hpp"

namespace lobsig {
namespace {

using nlohmann::json;

json params_to_json(const DetectorSpec& spec) {
    json j;
    switch (spec.kind) {
        case DetectorKind::EC: {
            const auto& p = std::get<EcParams>(spec.params);
            j["label_percentile"] = p.label_percentile;
            break;
        }
        case DetectorKind::MCD: {
            const auto& p = std::get<McdParams>(spec.params);
            j["contamination"] = p.contamination;
            j["n_starts"] = p.n_starts;
            j["refine_best"] = p.refine_best;
            j["cstep_tol"] = p.cstep_tol;
            j["max_csteps"] = p.max_csteps;
            break;
        }
        case DetectorKind::EE: {
            const auto& p = std::get<EeParams>(spec.params).core;
            j["contamination"] = p.contamination;
            j["n_starts"] = p.n_starts;
            j["refine_best"] = p.refine_best;
            j["cstep_tol"] = p.cstep_tol;
            j["max_csteps"] = p.max_csteps;
            break;
        }
        case DetectorKind::HBOS: {
            const auto& p = std::get<HbosParams>(spec.params);
            j["bins"] = p.bins;
            j["density_floor"] = p.density_floor;
            j["native_quantile"] = p.native_quantile;
            break;
        }
        case DetectorKind::OCSVM: {
            const auto& p = std::get<OcsvmParams>(spec.params);
            j["nu"] = p.nu;
            j["gamma"] = p.gamma;
            j["tol"] = p.tol;
            j["max_iter"] = p.max_iter;
            break;
        }
        case DetectorKind::DBSCAN: {
            const auto& p = std::get<DbscanParams>(spec.params);
            j["eps"] = p.eps;
            j["min_pts"] = p.min_pts;
            break;
        }
        case DetectorKind::OPTICS: {
            const auto& p = std::get<OpticsParams>(spec.params);
            j["min_pts"] = p.min_pts;
            j["label_quantile"] = p.label_quantile;
            break;
        }
        case DetectorKind::ISOF: {
            const auto& p = std::get<IsofParams>(spec.params);
            j["trees"] = p.n_trees;
            j["subsample"] = p.subsample;
            j["native_quantile"] = p.native_quantile;
            break;
        }
        case DetectorKind::LOF: {
            const auto& p = std::get<LofParams>(spec.params);
            j["k"] = p.k;
            j["label_threshold"] = p.label_threshold;
            break;
        }
        case DetectorKind::CBLOF: {
            const auto& p = std::get<CblofParams>(spec.params);
            j["clusters"] = p.n_clusters;
            j["alpha"] = p.alpha;
            j["beta"] = p.beta;
            j["weighted"] = p.weighted;
            j["tol"] = p.tol;
            j["max_iter"] = p.max_iter;
            j["native_quantile"] = p.native_quantile;
            break;
        }
        case DetectorKind::KMEANS: {
            const auto& p = std::get<KmeansParams>(spec.params);
            j["clusters"] = p.n_clusters;
            j["tol"] = p.tol;
            j["max_iter"] = p.max_iter;
            j["native_quantile"] = p.native_quantile;
            break;
        }
        case DetectorKind::KNN: {
            const auto& p = std::get<KnnParams>(spec.params);
            j["k"] = p.k;
            j["native_quantile"] = p.native_quantile;
            break;
        }
        case DetectorKind::SOD: {
            const auto& p = std::get<SodParams>(spec.params);
            j["ref_size"] = p.ref_size;
            j["snn_k"] = p.snn_k;
            j["variance_frac"] = p.variance_frac;
            j["native_quantile"] = p.native_quantile;
            break;
        }
    }
    return j;
}

std::string opt_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

std::string summary_csv_text(const std::vector<SummaryRow>& rows) {
    std::string text =
        "model,long_trades,short_trades,cum_profit,gain_pct,win_rate,total_fees,"
        "profit_per_trade\n";
    for (const auto& r : rows) {
        text += r.model;
        text += ',' + std::to_string(r.long_trades);
        text += ',' + std::to_string(r.short_trades);
        text += ',' + format_double(r.cum_profit);
        text += ',' + format_double(r.gain_pct);
        text += ',' + opt_field(r.win_rate);
        text += ',' + format_double(r.total_fees);
        text += ',' + opt_field(r.profit_per_trade);
        text += '\n';
    }
    return text;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_num(const std::string& s, const std::filesystem::path& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(0, "bad numeric field '" + s + "' in " + where.string());
    return v;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    if (config.input_path.has_value() == config.synthetic.has_value())
        throw ConfigError("exactly one of an input path or a synthetic config is required");
    if (config.specs.empty()) throw ConfigError("at least one detector is required");

    PipelineResult result;
    if (config.input_path) {
        result.series.records = parse_csv(*config.input_path, config.levels);
        std::ifstream in(*config.input_path, std::ios::binary);
        std::ostringstream raw;
        raw << in.rdbuf();
        const std::string bytes = raw.str();
        result.input_hash = fnv1a64(bytes.data(), bytes.size());
        result.series.labels.assign(result.series.records.size(), 0);
        result.series.kinds.assign(result.series.records.size(), std::nullopt);
    } else {
        result.series = generate_synthetic(*config.synthetic);
        const std::string bytes = serialize_csv(result.series.records);
        result.input_hash = fnv1a64(bytes.data(), bytes.size());
    }

    auto violations = validate_series(result.series.records);
    if (!violations.empty())
        throw ValidationError("input series invalid at record " +
                              std::to_string(violations.front().index) + ": " +
                              violations.front().what);

    result.features = build_feature_matrix(result.series.records, config.features);

    std::vector<double> closes;
    std::vector<TimestampMs> close_ts;
    closes.reserve(result.series.records.size());
    close_ts.reserve(result.series.records.size());
    for (const auto& rec : result.series.records) {
        closes.push_back(rec.close.to_double());
        close_ts.push_back(rec.ts);
    }
    try {
        result.benchmark_profit =
            buy_and_hold(closes, close_ts, config.backtest.initial_budget);
    } catch (const std::exception& e) {
        result.benchmark_error = e.what();
    }

    for (const DetectorSpec& spec : config.specs) {
        DetectorRun run;
        run.spec = spec;
        try {
            auto outcomes = run_all_detectors(result.features, {spec});
            if (!outcomes.front().ok()) throw Error(outcomes.front().error);
            run.scores = std::move(*outcomes.front().result);
            run.signals =
                build_signal_series(result.features, *run.scores, config.mode, config.percentile);
            run.backtest =
                run_backtest(run.signals->signals, closes, close_ts, config.backtest);
            run.backtest->benchmark_profit = result.benchmark_profit;
        } catch (const std::exception& e) {
            run.error = e.what();
            run.signals.reset();
            run.backtest.reset();
        }
        result.detectors.push_back(std::move(run));
    }
    return result;
}

std::vector<SummaryRow> summarize(const PipelineResult& result) {
    std::vector<SummaryRow> rows;
    for (const auto& run : result.detectors) {
        if (!run.ok() || !run.backtest) continue;
        SummaryRow r;
        r.model = to_string(run.spec.kind);
        r.long_trades = run.backtest->long_count;
        r.short_trades = run.backtest->short_count;
        r.cum_profit = run.backtest->cumulative_profit;
        r.gain_pct = run.backtest->gain_pct;
        r.win_rate = run.backtest->win_rate;
        r.total_fees = run.backtest->total_fees;
        r.profit_per_trade = run.backtest->profit_per_trade;
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_run_artifacts(const PipelineConfig& config, const PipelineResult& result,
                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = config.seed;
    manifest["levels"] = config.levels;
    if (config.input_path) {
        manifest["input"] = *config.input_path;
    } else {
        const auto& s = *config.synthetic;
        json syn;
        syn["n_records"] = s.n_records;
        syn["base_price"] = s.base_price;
        syn["base_volatility"] = s.base_volatility;
        syn["seed"] = s.seed;
        syn["levels"] = s.levels;
        json anomalies = json::array();
        for (const auto& a : s.anomalies) {
            json entry;
            entry["kind"] = to_string(a.kind);
            entry["rate"] = a.rate;
            entry["magnitude"] = a.magnitude;
            anomalies.push_back(entry);
        }
        syn["anomalies"] = anomalies;
        manifest["synthetic"] = syn;
    }
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(result.input_hash));
    manifest["input_hash"] = hash_hex;
    manifest["mode"] = to_string(config.mode);
    manifest["percentile"] = config.percentile;
    json feat;
    feat["immediate_vol_window"] = config.features.imm_vol_window;
    feat["realized_vol_window"] = config.features.realized_vol_window;
    feat["depth_levels"] = config.features.depth_levels;
    feat["momentum_window"] = config.features.momentum_window;
    manifest["features"] = feat;
    json bt;
    bt["initial_budget"] = config.backtest.initial_budget;
    bt["fraction"] = config.backtest.fraction;
    bt["fee_rate"] = config.backtest.fee_rate;
    bt["apply_fees"] = config.backtest.apply_fees;
    bt["exit_rule"] = to_string(config.backtest.exit_rule);
    manifest["backtest"] = bt;
    json detectors = json::array();
    for (const auto& run : result.detectors) {
        json d;
        d["kind"] = to_string(run.spec.kind);
        d["seed"] = run.spec.seed;
        d["params"] = params_to_json(run.spec);
        if (!run.ok()) d["error"] = run.error;
        detectors.push_back(d);
    }
    manifest["detectors"] = detectors;
    if (result.benchmark_profit)
        manifest["benchmark_profit"] = *result.benchmark_profit;
    else
        manifest["benchmark_error"] = result.benchmark_error;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    write_text(out_dir / "summary.csv", summary_csv_text(summarize(result)));

    const auto& X = result.features;
    for (const auto& run : result.detectors) {
        if (!run.ok()) continue;
        const auto dir = out_dir / "per_detector" / to_string(run.spec.kind);
        std::filesystem::create_directories(dir);

        std::string scores_text = "ts,raw_score,native_label\n";
        const auto& sv = *run.scores;
        for (std::size_t i = 0; i < sv.raw_scores.size(); ++i) {
            scores_text += std::to_string(X.row_timestamps[i]);
            scores_text += ',' + format_double(sv.raw_scores[i]);
            scores_text += ',';
            scores_text += sv.native_labels ? ((*sv.native_labels)[i] ? '1' : '0') : '0';
            scores_text += '\n';
        }
        write_text(dir / "scores.csv", scores_text);

        std::string signals_text = "ts,direction,score,momentum\n";
        for (const auto& sig : run.signals->signals) {
            signals_text += std::to_string(sig.timestamp);
            signals_text += ',';
            signals_text += to_string(sig.direction);
            signals_text += ',' + format_double(sig.source_score);
            signals_text += ',' + format_double(sig.momentum);
            signals_text += '\n';
        }
        write_text(dir / "signals.csv", signals_text);

        std::string ledger_text =
            "entry_ts,exit_ts,direction,amount,entry_price,exit_price,profit,fee,"
            "budget_after\n";
        for (const auto& e : run.backtest->ledger) {
            ledger_text += std::to_string(e.entry_ts);
            ledger_text += ',' + std::to_string(e.exit_ts);
            ledger_text += ',';
            ledger_text += to_string(e.direction);
            ledger_text += ',' + format_double(e.amount);
            ledger_text += ',' + format_double(e.entry_price);
            ledger_text += ',' + format_double(e.exit_price);
            ledger_text += ',' + format_double(e.profit);
            ledger_text += ',' + format_double(e.fee);
            ledger_text += ',' + format_double(e.budget_after);
            ledger_text += '\n';
        }
        write_text(dir / "ledger.csv", ledger_text);

        std::string equity_text = "ts,budget\n";
        for (const auto& pt : run.backtest->equity_curve) {
            equity_text += std::to_string(pt.ts);
            equity_text += ',' + format_double(pt.budget);
            equity_text += '\n';
        }
        write_text(dir / "equity.csv", equity_text);
    }
}

std::vector<SummaryRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs,
                                     const std::optional<std::filesystem::path>& out_dir) {
    if (run_dirs.empty()) throw ConfigError("compare needs at least one run directory");

    std::vector<SummaryRow> rows;
    std::set<std::string> seen_lines;
    for (const auto& dir : run_dirs) {
        const auto summary_path = dir / "summary.csv";
        std::ifstream in(summary_path);
        if (!in) throw Error("missing summary: " + summary_path.string());
        std::string line;
        if (!std::getline(in, line) || line.rfind("model,long_trades,", 0) != 0)
            throw ValidationError("unrecognized summary schema in " + summary_path.string());
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (!seen_lines.insert(line).second) {
                std::cerr << "warning: duplicate summary row skipped: " << line << "\n";
                continue;
            }
            auto f = split_fields(line);
            if (f.size() != 8)
                throw ValidationError("unrecognized summary row in " + summary_path.string());
            SummaryRow r;
            r.model = f[0];
            r.long_trades = static_cast<long long>(parse_num(f[1], summary_path));
            r.short_trades = static_cast<long long>(parse_num(f[2], summary_path));
            r.cum_profit = parse_num(f[3], summary_path);
            r.gain_pct = parse_num(f[4], summary_path);
            if (!f[5].empty()) r.win_rate = parse_num(f[5], summary_path);
            r.total_fees = parse_num(f[6], summary_path);
            if (!f[7].empty()) r.profit_per_trade = parse_num(f[7], summary_path);
            rows.push_back(std::move(r));
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SummaryRow& a, const SummaryRow& b) { return a.gain_pct > b.gain_pct; });

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        write_text(*out_dir / "comparison.csv", summary_csv_text(rows));

        // long-format equity points for every run (plot-ready)
        std::string equity_text = "run,model,ts,budget\n";
        for (const auto& dir : run_dirs) {
            const auto per = dir / "per_detector";
            if (!std::filesystem::exists(per)) continue;
            std::vector<std::filesystem::path> kinds;
            for (const auto& entry : std::filesystem::directory_iterator(per))
                if (entry.is_directory()) kinds.push_back(entry.path());
            std::sort(kinds.begin(), kinds.end());
            for (const auto& kind_dir : kinds) {
                std::ifstream in(kind_dir / "equity.csv");
                if (!in) continue;
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    equity_text += dir.filename().string();
                    equity_text += ',' + kind_dir.filename().string();
                    equity_text += ',' + line;
                    equity_text += '\n';
                }
            }
        }
        write_text(*out_dir / "equity_curves.csv", equity_text);

        std::string bars_text = "model,profit_per_trade,total_fees\n";
        for (const auto& r : rows) {
            bars_text += r.model;
            bars_text += ',' + opt_field(r.profit_per_trade);
            bars_text += ',' + format_double(r.total_fees);
            bars_text += '\n';
        }
        write_text(*out_dir / "bars.csv", bars_text);
    }
    return rows;
}

}  // namespace lobsig
