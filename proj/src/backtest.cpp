#include "lobsig/backtest.hpp"

#include <stdexcept>

#include "lobsig/errors.hpp"

namespace lobsig {

const char* to_string(ExitRule r) {
    switch (r) {
        case ExitRule::NextBar: return "next_bar";
        case ExitRule::NextSignal: return "next_signal";
    }
    throw std::logic_error("unknown exit rule");
}

std::optional<ExitRule> exit_rule_from_string(const std::string& name) {
    if (name == "next_bar") return ExitRule::NextBar;
    if (name == "next_signal") return ExitRule::NextSignal;
    return std::nullopt;
}

void BacktestConfig::validate() const {
    if (!(initial_budget > 0.0)) throw ConfigError("initial budget must be positive");
    if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("trade fraction must lie in (0, 1]");
    if (fee_rate < 0.0) throw ConfigError("fee rate cannot be negative");
}

BacktestResult run_backtest(const std::vector<TradeSignal>& signals,
                            std::span<const double> closes,
                            std::span<const TimestampMs> close_ts,
                            const BacktestConfig& config) {
    config.validate();
    if (closes.size() != close_ts.size())
        throw ValidationError("close prices and timestamps are not aligned");
    if (closes.empty()) throw ValidationError("cannot backtest an empty price series");
    for (std::size_t s = 1; s < signals.size(); ++s)
        if (signals[s].bar <= signals[s - 1].bar)
            throw ValidationError("signals must be strictly ordered in time");

    BacktestResult r;
    double budget = config.initial_budget;
    r.equity_curve.push_back({close_ts.front(), budget});
    std::size_t position_until = 0;  // first bar at which a new entry is allowed

    for (std::size_t s = 0; s < signals.size(); ++s) {
        const TradeSignal& sig = signals[s];
        if (sig.bar >= closes.size())
            throw ValidationError("signal bar lies outside the price series");
        if (sig.bar < position_until) {
            ++r.skipped_signals;
            continue;
        }
        std::size_t exit_bar;
        if (config.exit_rule == ExitRule::NextBar) {
            exit_bar = sig.bar + 1;
        } else {
            if (s + 1 >= signals.size()) {
                ++r.dropped_signals;
                continue;
            }
            exit_bar = signals[s + 1].bar;
        }
        if (exit_bar >= closes.size()) {
            ++r.dropped_signals;
            continue;
        }

        TradeLedgerEntry e;
        e.entry_ts = close_ts[sig.bar];
        e.exit_ts = close_ts[exit_bar];
        e.direction = sig.direction;
        e.entry_price = closes[sig.bar];
        e.exit_price = closes[exit_bar];
        e.amount = config.fraction * budget;
        e.price_change = sig.direction == Direction::Short
                             ? (e.entry_price - e.exit_price) / e.entry_price
                             : (e.exit_price - e.entry_price) / e.entry_price;
        e.profit = e.amount * e.price_change;
        e.fee = e.amount * config.fee_rate;
        budget += e.profit;
        if (config.apply_fees) budget -= e.fee;
        e.budget_after = budget;

        r.ledger.push_back(e);
        r.equity_curve.push_back({e.exit_ts, budget});
        r.total_fees += e.fee;
        if (sig.direction == Direction::Short) ++r.short_count; else ++r.long_count;
        position_until = exit_bar;

        if (!(budget > 0.0)) {
            r.ruined = true;
            break;
        }
    }

    r.final_budget = budget;
    r.cumulative_profit = budget - config.initial_budget;
    r.gain_pct = 100.0 * r.cumulative_profit / config.initial_budget;
    r.win_rate = win_rate(r.ledger);
    const long long n_trades = r.long_count + r.short_count;
    if (n_trades > 0) r.profit_per_trade = profit_per_trade(r.cumulative_profit, n_trades);
    return r;
}

double buy_and_hold(std::span<const double> closes, std::span<const TimestampMs> close_ts,
                    double initial_budget) {
    if (closes.size() != close_ts.size())
        throw ValidationError("close prices and timestamps are not aligned");
    constexpr TimestampMs kDayMs = 86'400'000;

    // last close of each UTC day, in series order
    std::vector<double> daily;
    std::vector<TimestampMs> day_of;
    for (std::size_t i = 0; i < closes.size(); ++i) {
        TimestampMs day = close_ts[i] >= 0 ? close_ts[i] / kDayMs
                                           : (close_ts[i] - (kDayMs - 1)) / kDayMs;
        if (!day_of.empty() && day_of.back() == day) {
            daily.back() = closes[i];
        } else {
            day_of.push_back(day);
            daily.push_back(closes[i]);
        }
    }
    if (daily.size() < 2)
        throw ValidationError("buy-and-hold needs at least two distinct days of data");

    double sum_returns = 0.0;
    for (std::size_t d = 1; d < daily.size(); ++d)
        sum_returns += (daily[d] - daily[d - 1]) / daily[d - 1];
    return initial_budget * sum_returns;  // B0 * (1 + sum r) - B0
}

std::optional<double> win_rate(const std::vector<TradeLedgerEntry>& ledger) {
    if (ledger.empty()) return std::nullopt;
    long long wins = 0;
    for (const auto& e : ledger)
        if (e.profit > 0.0) ++wins;
    return 100.0 * static_cast<double>(wins) / static_cast<double>(ledger.size());
}

FeeReport fee_report(const std::vector<TradeLedgerEntry>& ledger, double fee_rate) {
    if (fee_rate < 0.0) throw ConfigError("fee rate cannot be negative");
    FeeReport r;
    r.per_trade.reserve(ledger.size());
    for (const auto& e : ledger) {
        double fee = e.amount * fee_rate;
        r.per_trade.push_back(fee);
        r.total += fee;
    }
    return r;
}

double profit_per_trade(double cumulative_profit, long long n_trades) {
    if (n_trades <= 0) throw ValidationError("profit per trade needs at least one trade");
    return cumulative_profit / static_cast<double>(n_trades);
}

}  // namespace lobsig
