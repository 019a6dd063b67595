#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowtox/backtest.hpp"
#include "flowtox/error.hpp"

namespace flowtox::backtest {

namespace {

using marketdata::Bar;

double entry_price(const Bar& b, Side side, double tick) {
    if (side == Side::Buy) return b.bid1 ? *b.bid1 : b.close + 0.5 * tick;
    return b.ask1 ? *b.ask1 : b.close - 0.5 * tick;
}

// Closing a long sells into the bid, closing a short lifts the ask.
double exit_price(const Bar& b, Side held, double tick) {
    if (held == Side::Buy) return b.bid1 ? *b.bid1 : b.close - 0.5 * tick;
    return b.ask1 ? *b.ask1 : b.close + 0.5 * tick;
}

double close_change_sigma(const std::vector<Bar>& bars, std::size_t begin, std::size_t end) {
    std::vector<double> d;
    for (std::size_t k = begin + 1; k < end; ++k) {
        if (bars[k].slot == bars[k - 1].slot) d.push_back(bars[k].close - bars[k - 1].close);
    }
    if (d.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : d) mean += x;
    mean /= static_cast<double>(d.size());
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(d.size()));
}

}  // namespace

Decision NullPolicy::decide(std::size_t /*bar*/) { return {}; }

EngineResult run_engine(const marketdata::BarSeries& series, Policy& policy, const EngineConfig& cfg) {
    const auto& bars = series.bars;
    const std::size_t n = bars.size();
    if (cfg.first_bar == 0) throw std::invalid_argument("run_engine: first_bar must be >= 1");
    if (cfg.stop_loss_sigmas < 0.0) throw std::invalid_argument("run_engine: stop_loss_sigmas must be >= 0");
    if (cfg.first_bar >= n) {
        throw DataError("run_engine: no bars after the warm-up (" + std::to_string(n) + " bars, first decision bar " +
                        std::to_string(cfg.first_bar) + ")");
    }
    Account acct(cfg.costs);
    const double tick = cfg.costs.tick_size;
    EngineResult res;
    const double bench_base = bars[cfg.first_bar - 1].close;
    double sigma_price = 0.0;
    std::size_t day_begin = cfg.first_bar - 1;  // first bar of the day bar t-1 belongs to
    while (day_begin > 0 && bars[day_begin - 1].slot.day == bars[cfg.first_bar - 1].slot.day) --day_begin;

    auto mark = [&](Timestamp ts, double price) {
        res.equity.push_back({ts, acct.equity(price)});
        res.benchmark.push_back({ts, cfg.costs.capital * price / bench_base});
    };

    for (std::size_t t = cfg.first_bar; t < n; ++t) {
        const Bar& prev = bars[t - 1];
        const Bar& cur = bars[t];
        const bool new_day = t == cfg.first_bar || cur.slot.day != prev.slot.day;
        if (new_day) {
            if (cfg.flatten_daily && acct.position() != 0) {
                acct.close(cur.ts, exit_price(prev, acct.side(), tick), "day-end");
            }
            sigma_price = close_change_sigma(bars, day_begin, t);
            day_begin = t;
            policy.on_day_start(t);
        } else {
            if (acct.position() != 0 && cfg.stop_loss_sigmas > 0.0 && sigma_price > 0.0 &&
                strategy::stop_loss_check(acct.entry_price(), prev.close, sigma_price, cfg.stop_loss_sigmas,
                                          acct.side())) {
                acct.close(cur.ts, exit_price(prev, acct.side(), tick), "stop-loss");
            }
            if (acct.position() != 0 &&
                acct.equity(prev.close) < acct.margin_held() * cfg.costs.maintenance_ratio) {
                acct.close(cur.ts, exit_price(prev, acct.side(), tick), "margin-call");
                ++res.margin_calls;
                if (cfg.costs.strict_margin) {
                    throw NumericalError("run_engine: margin call at bar " + std::to_string(t) +
                                         " with strict margin enabled");
                }
            }
            Decision d = policy.decide(t);
            d.signal.ts = cur.ts;
            SignalRecord rec;
            rec.ts = cur.ts;
            rec.side = d.signal.side;
            rec.quote = d.signal.quote;
            rec.predicted = d.signal.predicted;
            rec.delta1 = d.signal.delta1;
            rec.delta1_raw = d.delta1_raw;
            rec.vpin = d.vpin;
            rec.delta2 = d.delta2;
            rec.delta3 = d.delta3;
            rec.layer_trace = d.signal.layer_trace;
            res.signals.push_back(std::move(rec));

            const Side want = d.signal.side;
            if (want != Side::None) {
                ++res.trade_signals;
                if (want != acct.side()) {
                    if (acct.position() != 0) acct.close(cur.ts, exit_price(prev, acct.side(), tick), "reverse");
                    const double price = entry_price(prev, want, tick);
                    std::int64_t qty = 0;
                    if (d.quantity) {
                        qty = *d.quantity;
                    } else if (d.fraction > 0.0) {
                        const double per_contract = price * cfg.costs.multiplier * cfg.costs.margin_rate;
                        qty = static_cast<std::int64_t>(std::floor(d.fraction * acct.cash() / per_contract));
                    }
                    if (qty > 0) (void)acct.open(cur.ts, want, qty, price, "entry");
                }
            }
        }
        mark(cur.ts, prev.close);
    }

    const Bar& last = bars.back();
    const Timestamp end_ts = last.ts + (series.interval > 0 ? series.interval : 1);
    if (acct.position() != 0) acct.close(end_ts, exit_price(last, acct.side(), tick), "final");
    mark(end_ts, last.close);

    res.fills = acct.fills();
    res.fees_paid = acct.fees_paid();
    res.final_cash = acct.cash();
    res.final_margin = acct.margin_held();
    res.realized_pnl = acct.realized_pnl();
    return res;
}

}  // namespace flowtox::backtest
