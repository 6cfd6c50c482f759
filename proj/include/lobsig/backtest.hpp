#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lobsig/signal.hpp"

namespace lobsig {

enum class ExitRule { NextBar, NextSignal };

const char* to_string(ExitRule r);
std::optional<ExitRule> exit_rule_from_string(const std::string& name);

struct BacktestConfig {
    double initial_budget = 1500.0;
    double fraction = 0.3333;   // of current budget committed per trade
    double fee_rate = 0.0008;   // 8 bps per trade notional
    bool apply_fees = false;    // fees are reported either way
    ExitRule exit_rule = ExitRule::NextBar;

    void validate() const;
};

struct TradeLedgerEntry {
    TimestampMs entry_ts = 0;
    TimestampMs exit_ts = 0;
    Direction direction = Direction::Long;
    double amount = 0.0;
    double entry_price = 0.0;
    double exit_price = 0.0;
    double price_change = 0.0;  // signed fraction, positive = profitable
    double profit = 0.0;
    double fee = 0.0;           // amount * fee_rate, charged only if apply_fees
    double budget_after = 0.0;
};

struct EquityPoint {
    TimestampMs ts = 0;
    double budget = 0.0;
};

struct BacktestResult {
    std::vector<TradeLedgerEntry> ledger;
    std::vector<EquityPoint> equity_curve;
    double final_budget = 0.0;
    double cumulative_profit = 0.0;
    double gain_pct = 0.0;
    std::optional<double> win_rate;          // absent with no trades
    long long long_count = 0;
    long long short_count = 0;
    double total_fees = 0.0;                 // diagnostic, independent of apply_fees
    std::optional<double> profit_per_trade;  // absent with no trades
    std::optional<double> benchmark_profit;  // buy-and-hold, filled by the caller
    long long skipped_signals = 0;           // arrived while a position was open
    long long dropped_signals = 0;           // no exit bar available
    bool ruined = false;                     // budget hit zero; simulation halted
};

/// Sequential fixed-fractional simulation: entry at the close of the signal
/// bar, exit at the next bar close or the next signal, one position at a
/// time. Shorts profit from (entry - exit) / entry; longs from the negation.
BacktestResult run_backtest(const std::vector<TradeSignal>& signals,
                            std::span<const double> closes,
                            std::span<const TimestampMs> close_ts,
                            const BacktestConfig& config);

/// Simple-sum (non-compounded) daily-return benchmark: B_0 * sum of daily
/// returns, days cut at UTC midnight, last close of each day. Throws when
/// fewer than two distinct days exist.
double buy_and_hold(std::span<const double> closes, std::span<const TimestampMs> close_ts,
                    double initial_budget);

/// Percentage of ledger entries with strictly positive profit; absent for an
/// empty ledger.
std::optional<double> win_rate(const std::vector<TradeLedgerEntry>& ledger);

struct FeeReport {
    double total = 0.0;
    std::vector<double> per_trade;
};

/// Fee diagnostic at an arbitrary rate: amount * rate per trade, regardless
/// of whether the backtest charged fees.
FeeReport fee_report(const std::vector<TradeLedgerEntry>& ledger, double fee_rate);

/// cumulative profit / trade count; n_trades must be positive.
double profit_per_trade(double cumulative_profit, long long n_trades);

}  // namespace lobsig
