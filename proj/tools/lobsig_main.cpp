#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lobsig/errors.hpp"
#include "lobsig/report.hpp"
#include "lobsig/rng.hpp"

namespace {

using namespace lobsig;

// exit codes: 0 ok, 1 runtime failure, 2 usage/config error
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : Error {
    using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("expected a number for " + what + ", got '" + s + "'");
    }
}

long long parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("expected an integer for " + what + ", got '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError("expected true/false for " + what + ", got '" + s + "'");
}

// default anomaly cocktail for `--synthetic default`
std::vector<AnomalySpec> default_anomalies() {
    return {
        {AnomalyKind::VolumeSpike, 0.010, 15.0},
        {AnomalyKind::VolumeDust, 0.005, 10.0},
        {AnomalyKind::TimeGap, 0.005, 4.0},
        {AnomalyKind::DepthWithdrawal, 0.005, 8.0},
        {AnomalyKind::DepthInflation, 0.005, 8.0},
        {AnomalyKind::VolatilityShock, 0.010, 6.0},
        {AnomalyKind::AnomalousCalm, 0.005, 5.0},
    };
}

// grammar: "default" | key=value[,key=value...]
// keys: n, seed, base_price, base_vol, levels,
//       anomalies=kind:rate:magnitude[+kind:rate:magnitude...]
SyntheticConfig parse_synthetic(const std::string& text, int levels, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.levels = levels;
    cfg.seed = seed;
    cfg.anomalies = default_anomalies();
    if (text == "default") return cfg;

    for (const std::string& part : split(text, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw UsageError("bad --synthetic entry '" + part + "' (expected key=value)");
        const std::string key = trim(part.substr(0, eq));
        const std::string value = trim(part.substr(eq + 1));
        if (key == "n") {
            cfg.n_records = static_cast<std::size_t>(parse_int(value, "--synthetic n"));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(value, "--synthetic seed"));
        } else if (key == "base_price") {
            cfg.base_price = parse_double(value, "--synthetic base_price");
        } else if (key == "base_vol") {
            cfg.base_volatility = parse_double(value, "--synthetic base_vol");
        } else if (key == "levels") {
            cfg.levels = static_cast<int>(parse_int(value, "--synthetic levels"));
        } else if (key == "anomalies") {
            cfg.anomalies.clear();
            if (value == "none") continue;
            for (const std::string& one : split(value, '+')) {
                auto f = split(one, ':');
                if (f.size() != 3)
                    throw UsageError("bad anomaly '" + one + "' (expected kind:rate:magnitude)");
                auto kind = anomaly_kind_from_string(trim(f[0]));
                if (!kind) throw UsageError("unknown anomaly kind '" + f[0] + "' in --synthetic");
                cfg.anomalies.push_back({*kind, parse_double(f[1], "anomaly rate"),
                                         parse_double(f[2], "anomaly magnitude")});
            }
        } else {
            throw UsageError("unknown --synthetic key '" + key + "'");
        }
    }
    return cfg;
}

std::vector<DetectorSpec> parse_detectors(const std::string& list, std::uint64_t seed) {
    if (list == "all") return default_specs(seed);
    std::vector<DetectorSpec> specs;
    for (const std::string& raw : split(list, ',')) {
        const std::string name = trim(raw);
        auto kind = detector_kind_from_string(name);
        if (!kind)
            throw UsageError("unknown detector '" + name +
                             "' in --detectors (see --help for the list)");
        specs.push_back(
            DetectorSpec::defaults(*kind, mix64(seed, static_cast<std::uint64_t>(*kind) + 1)));
    }
    if (specs.empty()) throw UsageError("--detectors selected nothing");
    return specs;
}

// `kind.param=value` assignments from config files and --set
void apply_param(DetectorSpec& spec, const std::string& param, const std::string& value,
                 const std::string& where) {
    auto bad_param = [&]() -> UsageError {
        return UsageError("unknown parameter '" + param + "' for detector " +
                          to_string(spec.kind) + " in " + where);
    };
    switch (spec.kind) {
        case DetectorKind::EC: {
            auto& p = std::get<EcParams>(spec.params);
            if (param == "label_percentile") p.label_percentile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::MCD:
        case DetectorKind::EE: {
            McdParams& p = spec.kind == DetectorKind::MCD
                               ? std::get<McdParams>(spec.params)
                               : std::get<EeParams>(spec.params).core;
            if (param == "contamination") p.contamination = parse_double(value, where);
            else if (param == "n_starts") p.n_starts = static_cast<int>(parse_int(value, where));
            else if (param == "refine_best") p.refine_best = static_cast<int>(parse_int(value, where));
            else if (param == "cstep_tol") p.cstep_tol = parse_double(value, where);
            else if (param == "max_csteps") p.max_csteps = static_cast<int>(parse_int(value, where));
            else throw bad_param();
            break;
        }
        case DetectorKind::HBOS: {
            auto& p = std::get<HbosParams>(spec.params);
            if (param == "bins") p.bins = static_cast<int>(parse_int(value, where));
            else if (param == "density_floor") p.density_floor = parse_double(value, where);
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::OCSVM: {
            auto& p = std::get<OcsvmParams>(spec.params);
            if (param == "nu") p.nu = parse_double(value, where);
            else if (param == "gamma") p.gamma = parse_double(value, where);
            else if (param == "tol") p.tol = parse_double(value, where);
            else if (param == "max_iter") p.max_iter = static_cast<int>(parse_int(value, where));
            else throw bad_param();
            break;
        }
        case DetectorKind::DBSCAN: {
            auto& p = std::get<DbscanParams>(spec.params);
            if (param == "eps") p.eps = parse_double(value, where);
            else if (param == "min_pts") p.min_pts = static_cast<int>(parse_int(value, where));
            else throw bad_param();
            break;
        }
        case DetectorKind::OPTICS: {
            auto& p = std::get<OpticsParams>(spec.params);
            if (param == "min_pts") p.min_pts = static_cast<int>(parse_int(value, where));
            else if (param == "label_quantile") p.label_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::ISOF: {
            auto& p = std::get<IsofParams>(spec.params);
            if (param == "trees") p.n_trees = static_cast<int>(parse_int(value, where));
            else if (param == "subsample") p.subsample = static_cast<int>(parse_int(value, where));
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::LOF: {
            auto& p = std::get<LofParams>(spec.params);
            if (param == "k") p.k = static_cast<int>(parse_int(value, where));
            else if (param == "label_threshold") p.label_threshold = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::CBLOF: {
            auto& p = std::get<CblofParams>(spec.params);
            if (param == "clusters") p.n_clusters = static_cast<int>(parse_int(value, where));
            else if (param == "alpha") p.alpha = parse_double(value, where);
            else if (param == "beta") p.beta = parse_double(value, where);
            else if (param == "weighted") p.weighted = parse_bool(value, where);
            else if (param == "tol") p.tol = parse_double(value, where);
            else if (param == "max_iter") p.max_iter = static_cast<int>(parse_int(value, where));
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::KMEANS: {
            auto& p = std::get<KmeansParams>(spec.params);
            if (param == "clusters") p.n_clusters = static_cast<int>(parse_int(value, where));
            else if (param == "tol") p.tol = parse_double(value, where);
            else if (param == "max_iter") p.max_iter = static_cast<int>(parse_int(value, where));
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::KNN: {
            auto& p = std::get<KnnParams>(spec.params);
            if (param == "k") p.k = static_cast<int>(parse_int(value, where));
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
        case DetectorKind::SOD: {
            auto& p = std::get<SodParams>(spec.params);
            if (param == "ref_size") p.ref_size = static_cast<int>(parse_int(value, where));
            else if (param == "snn_k") p.snn_k = static_cast<int>(parse_int(value, where));
            else if (param == "variance_frac") p.variance_frac = parse_double(value, where);
            else if (param == "native_quantile") p.native_quantile = parse_double(value, where);
            else throw bad_param();
            break;
        }
    }
}

void apply_assignment(std::vector<DetectorSpec>& specs, const std::string& assignment,
                      const std::string& where) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw UsageError("bad assignment '" + assignment + "' in " + where +
                         " (expected kind.param=value)");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    auto dot = key.find('.');
    if (dot == std::string::npos)
        throw UsageError("bad key '" + key + "' in " + where + " (expected kind.param)");
    const std::string kind_name = key.substr(0, dot);
    const std::string param = key.substr(dot + 1);
    auto kind = detector_kind_from_string(kind_name);
    if (!kind) throw UsageError("unknown detector '" + kind_name + "' in " + where);
    // assignments for detectors outside the selected set are ignored, so one
    // config file can serve runs with different --detectors subsets
    for (auto& spec : specs)
        if (spec.kind == *kind) apply_param(spec, param, value, where);
}

void apply_config_file(std::vector<DetectorSpec>& specs, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        apply_assignment(specs, t, path + ":" + std::to_string(line_no));
    }
}

void print_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "model        long  short  cum_profit    gain_pct  win_rate  total_fees  per_trade\n";
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-12s %5lld %6lld %11.4f %11.4f %9s %11.4f %10s\n",
                      r.model.c_str(), r.long_trades, r.short_trades, r.cum_profit, r.gain_pct,
                      r.win_rate ? std::to_string(*r.win_rate).substr(0, 7).c_str() : "-",
                      r.total_fees,
                      r.profit_per_trade ? std::to_string(*r.profit_per_trade).substr(0, 8).c_str()
                                         : "-");
        os << buf;
    }
}

int cmd_run(const std::string& input, const std::string& synthetic, int levels,
            const std::string& detectors, const std::string& mode_name, double percentile,
            int momentum_window, double budget, double fraction, int fee_bps, bool apply_fees,
            const std::string& exit_name, std::uint64_t seed, const std::string& out_dir,
            const std::string& config_path, const std::vector<std::string>& sets) {
    if (input.empty() == synthetic.empty())
        throw UsageError("exactly one of --input or --synthetic is required");

    PipelineConfig cfg;
    cfg.levels = levels;
    cfg.seed = seed;
    if (!input.empty()) {
        cfg.input_path = input;
    } else {
        cfg.synthetic = parse_synthetic(synthetic, levels, seed);
        cfg.levels = cfg.synthetic->levels;
    }
    cfg.specs = parse_detectors(detectors, seed);
    if (!config_path.empty()) apply_config_file(cfg.specs, config_path);
    for (const std::string& s : sets) apply_assignment(cfg.specs, s, "--set");

    auto mode = label_mode_from_string(mode_name);
    if (!mode) throw UsageError("unknown --mode '" + mode_name + "' (percentile or native)");
    cfg.mode = *mode;
    cfg.percentile = percentile;
    cfg.features.momentum_window = momentum_window;
    cfg.backtest.initial_budget = budget;
    cfg.backtest.fraction = fraction;
    cfg.backtest.fee_rate = fee_bps / 10000.0;
    cfg.backtest.apply_fees = apply_fees;
    auto exit_rule = exit_rule_from_string(exit_name);
    if (!exit_rule) throw UsageError("unknown --exit '" + exit_name + "' (next_bar or next_signal)");
    cfg.backtest.exit_rule = *exit_rule;

    PipelineResult result = run_pipeline(cfg);
    write_run_artifacts(cfg, result, out_dir);

    int failed = 0;
    for (const auto& run : result.detectors) {
        if (!run.ok()) {
            std::cerr << "warning: detector " << to_string(run.spec.kind) << " failed: "
                      << run.error << "\n";
            ++failed;
        }
    }
    print_summary(std::cout, summarize(result));
    if (result.benchmark_profit)
        std::cout << "buy_and_hold_profit " << format_double(*result.benchmark_profit) << "\n";
    std::cout << "wrote " << out_dir << "\n";
    if (failed == static_cast<int>(result.detectors.size()))
        throw Error("all detectors failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limit-order-book anomaly detectors with a mean-reversion backtest"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run detectors end to end and write artifacts");
    std::string input, synthetic;
    int levels = 10;
    std::string detectors = "all";
    std::string mode = "percentile";
    double percentile = 95.0;
    int momentum_window = 5;
    double budget = 1500.0;
    double fraction = 0.3333;
    int fee_bps = 8;
    bool apply_fees = false;
    std::string exit_rule = "next_bar";
    std::uint64_t seed = 42;
    std::string out_dir = "run_out";
    std::string config_path;
    std::vector<std::string> sets;
    run->add_option("--input", input, "input CSV path (bars plus book levels)");
    run->add_option("--synthetic", synthetic,
                    "synthetic spec: 'default' or n=..,seed=..,base_price=..,base_vol=..,"
                    "levels=..,anomalies=kind:rate:mag+...");
    run->add_option("--levels", levels, "book levels per side")->capture_default_str();
    run->add_option("--detectors", detectors,
                    "comma list or 'all': ec,mcd,ee,hbos,ocsvm,dbscan,optics,isoforest,lof,"
                    "cblof,kmeans,knn,sod")
        ->capture_default_str();
    run->add_option("--mode", mode, "flagging mode: percentile | native")->capture_default_str();
    run->add_option("--percentile", percentile, "score percentile for flags, in percent")
        ->capture_default_str();
    run->add_option("--momentum-window", momentum_window, "bars in the momentum lookback")
        ->capture_default_str();
    run->add_option("--budget", budget, "initial budget")->capture_default_str();
    run->add_option("--fraction", fraction, "budget fraction per trade")->capture_default_str();
    run->add_option("--fee-bps", fee_bps, "fee in basis points per trade notional")
        ->capture_default_str();
    run->add_flag("--apply-fees", apply_fees, "deduct fees from the budget (default: report only)");
    run->add_option("--exit", exit_rule, "exit rule: next_bar | next_signal")
        ->capture_default_str();
    run->add_option("--seed", seed, "seed for synthetic data and stochastic detectors")
        ->capture_default_str();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--config", config_path,
                    "detector parameter file, lines of kind.param=value")
        ->envname("LOBSIG_CONFIG");
    run->add_option("--set", sets, "inline parameter override kind.param=value (repeatable)");

    auto* compare = app.add_subcommand("compare", "merge and rank completed run directories");
    std::vector<std::string> run_dirs;
    std::string compare_out;
    compare->add_option("dirs", run_dirs, "run directories (each holding summary.csv)")
        ->required();
    compare->add_option("--out", compare_out, "directory for comparison.csv and plot data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(input, synthetic, levels, detectors, mode, percentile,
                           momentum_window, budget, fraction, fee_bps, apply_fees, exit_rule,
                           seed, out_dir, config_path, sets);
        }
        std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
        std::optional<std::filesystem::path> out;
        if (!compare_out.empty()) out = compare_out;
        print_summary(std::cout, compare_runs(dirs, out));
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
