#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowtox/marketdata.hpp"
#include "flowtox/strategy.hpp"
#include "flowtox/volatility.hpp"
#include "flowtox/vpin.hpp"

namespace flowtox::backtest {

using marketdata::Timestamp;
using strategy::Side;

struct Costs {
    double capital = 1e7;
    double margin_rate = 0.25;
    double fee_bps = 6.87;  ///< per side, in 1/10000 of notional
    double multiplier = 300.0;
    double tick_size = 0.2;  ///< half a tick is charged when no quotes exist
    double maintenance_ratio = 1.0;  ///< margin call when equity < margin_held * ratio
    bool strict_margin = false;      ///< treat a margin call as a failed run

    void validate() const;
    [[nodiscard]] double fee(double notional) const { return notional * fee_bps / 1e4; }
};

struct Fill {
    Timestamp ts = 0;
    Side side = Side::None;
    std::int64_t qty = 0;
    double price = 0.0;
    double fee = 0.0;
    std::int64_t position_after = 0;
    double cash_after = 0.0;
    double margin_after = 0.0;
    double realized_pnl = 0.0;
    double cash_delta = 0.0;
    double margin_delta = 0.0;
    std::string reason;
};

/// Futures account with margin posted from cash. Opening moves margin and the
/// fee out of cash; closing returns margin plus realized PnL less the fee.
class Account {
public:
    explicit Account(const Costs& costs);

    /// Opens a position from flat; returns false (and does nothing) when cash
    /// cannot cover margin plus fee.
    bool open(Timestamp ts, Side side, std::int64_t qty, double price, const std::string& reason);
    /// Closes the whole position; no-op when flat.
    void close(Timestamp ts, double price, const std::string& reason);

    [[nodiscard]] double equity(double mark) const;
    [[nodiscard]] double unrealized(double mark) const;
    [[nodiscard]] double cash() const { return cash_; }
    [[nodiscard]] double margin_held() const { return margin_; }
    [[nodiscard]] std::int64_t position() const { return position_; }
    [[nodiscard]] Side side() const { return position_ > 0 ? Side::Buy : position_ < 0 ? Side::Sell : Side::None; }
    [[nodiscard]] double entry_price() const { return entry_; }
    [[nodiscard]] double fees_paid() const { return fees_; }
    [[nodiscard]] double realized_pnl() const { return realized_; }
    [[nodiscard]] const std::vector<Fill>& fills() const { return fills_; }
    [[nodiscard]] const Costs& costs() const { return costs_; }

private:
    Costs costs_;
    double cash_;
    double margin_ = 0.0;
    std::int64_t position_ = 0;
    double entry_ = 0.0;
    double fees_ = 0.0;
    double realized_ = 0.0;
    std::vector<Fill> fills_;
};

/// What a policy wants at one decision bar.
struct Decision {
    strategy::Signal signal;
    double fraction = 0.0;                 ///< of available cash, when quantity is empty
    std::optional<std::int64_t> quantity;  ///< fixed contract count
    // Diagnostics carried into the signal log.
    double delta1_raw = 0.0;
    std::optional<double> vpin;
    double delta2 = 0.0;
    double delta3 = 0.0;
};

/// Decision source plugged into the engine. decide(t) may only look at bars
/// strictly before t.
class Policy {
public:
    virtual ~Policy() = default;
    /// Called at the first bar of each trading day, before any decision.
    virtual void on_day_start(std::size_t /*bar*/) {}
    virtual Decision decide(std::size_t bar) = 0;
};

/// Never trades.
class NullPolicy final : public Policy {
public:
    Decision decide(std::size_t bar) override;
};

struct SignalRecord {
    Timestamp ts = 0;
    Side side = Side::None;
    strategy::Quote quote = strategy::Quote::None;
    double predicted = 0.0;
    double delta1 = 0.0;
    double delta1_raw = 0.0;
    std::optional<double> vpin;
    double delta2 = 0.0;
    double delta3 = 0.0;
    std::string layer_trace;
};

struct EquityPoint {
    Timestamp ts = 0;
    double equity = 0.0;
};

struct EngineConfig {
    Costs costs;
    std::size_t first_bar = 1;     ///< earliest decision bar (end of warm-up)
    double stop_loss_sigmas = 2.0;  ///< 0 disables the stop
    bool flatten_daily = true;
};

struct EngineResult {
    std::vector<Fill> fills;
    std::vector<EquityPoint> equity;
    std::vector<EquityPoint> benchmark;  ///< buy-and-hold, same start value as equity
    std::vector<SignalRecord> signals;
    std::size_t trade_signals = 0;  ///< decisions with side != none
    std::size_t margin_calls = 0;
    double fees_paid = 0.0;
    double final_cash = 0.0;
    double final_margin = 0.0;
    double realized_pnl = 0.0;
};

/// Sequential replay over bars. At decision bar t every action uses bar t-1
/// prices: entries at the signal's quote (bid1 for buys, ask1 for sells),
/// exits at the opposite marketable quote, or the close with half a tick of
/// slippage when the bar has no quotes.
[[nodiscard]] EngineResult run_engine(const marketdata::BarSeries& bars, Policy& policy,
                                      const EngineConfig& cfg);

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
    double total_return = 0.0;
    double annualized_return = 0.0;
    double benchmark_return = 0.0;
    double relative_return = 0.0;
    std::optional<double> alpha;  ///< empty when benchmark variance is 0
    std::optional<double> beta;
    double max_drawdown = 0.0;
    double sharpe = 0.0;
};

[[nodiscard]] double max_drawdown(std::span<const double> equity);

[[nodiscard]] Metrics compute_metrics(std::span<const double> equity, std::span<const double> benchmark,
                                      double periods_per_year);

// ---------------------------------------------------------------------------
// Layered strategy backtest

struct BacktestConfig {
    strategy::StrategyConfig strategy;
    Costs costs;
    volatility::GarchSpec garch;
    std::size_t garch_window_days = 5;
    vpin::VpinConfig vpin;
    double svm_sigma = 1e-4;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    std::size_t svm_max_points = 2000;
    marketdata::Duration bar_interval = marketdata::kNanosPerMinute;
    std::size_t trading_days_per_year = 252;

    void validate() const;
};

struct BacktestReport {
    std::string variant;
    Metrics metrics;
    std::size_t trade_count = 0;  ///< emitted (post-gate) trade signals
    std::size_t fill_count = 0;
    std::size_t margin_calls = 0;
    double fees_paid = 0.0;
    std::uint64_t data_hash = 0;
};

struct BacktestRun {
    BacktestReport report;
    EngineResult engine;
    double bucket_volume = 0.0;
};

/// FNV-1a over every tick field; identifies the input of a run.
[[nodiscard]] std::uint64_t data_hash(const marketdata::TickSeries& ticks);

[[nodiscard]] double periods_per_year(const marketdata::SessionCalendar& cal,
                                      marketdata::Duration bar_interval, std::size_t trading_days);

/// GARCH direction with optional VPIN threshold adaptation and SVM veto, per
/// the layer flags in cfg.strategy.
[[nodiscard]] BacktestRun run_backtest(const marketdata::TickSeries& ticks, const BacktestConfig& cfg);

/// G, G+S, G+V and G+V+S on the same data and seeds.
[[nodiscard]] std::vector<BacktestRun> run_variants(const marketdata::TickSeries& ticks,
                                                    const BacktestConfig& cfg);

// ---------------------------------------------------------------------------
// Output

void write_trades(std::ostream& out, const std::vector<Fill>& fills);
void write_equity(std::ostream& out, const std::vector<EquityPoint>& equity);
void write_signals(std::ostream& out, const std::vector<SignalRecord>& signals);
void write_reports(std::ostream& out, const std::vector<BacktestReport>& reports);

}  // namespace flowtox::backtest
