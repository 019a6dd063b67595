#include <cstdio>
#include <ostream>

#include "flowtox/backtest.hpp"
#include "flowtox/csv.hpp"

namespace flowtox::backtest {

void write_trades(std::ostream& out, const std::vector<Fill>& fills) {
    csv::Writer w(out);
    w.header({"ts", "side", "qty", "price", "fee", "position_after", "cash_after", "reason"});
    for (const auto& f : fills) {
        w.field(f.ts).field(strategy::to_string(f.side)).field(f.qty).field(f.price).field(f.fee)
            .field(f.position_after).field(f.cash_after).field(f.reason).end_row();
    }
}

void write_equity(std::ostream& out, const std::vector<EquityPoint>& equity) {
    csv::Writer w(out);
    w.header({"ts", "equity"});
    for (const auto& e : equity) w.field(e.ts).field(e.equity).end_row();
}

void write_signals(std::ostream& out, const std::vector<SignalRecord>& signals) {
    csv::Writer w(out);
    w.header({"ts", "side", "quote", "delta1", "vpin", "layer_trace", "predicted", "delta1_raw", "delta2", "delta3"});
    for (const auto& s : signals) {
        w.field(s.ts).field(strategy::to_string(s.side)).field(strategy::to_string(s.quote)).field(s.delta1);
        if (s.vpin) w.field(*s.vpin);
        else w.empty_field();
        w.field(s.layer_trace).field(s.predicted).field(s.delta1_raw).field(s.delta2).field(s.delta3).end_row();
    }
}

void write_reports(std::ostream& out, const std::vector<BacktestReport>& reports) {
    csv::Writer w(out);
    w.header({"variant", "total_return", "annualized_return", "benchmark_return", "relative_return", "alpha",
              "beta", "max_drawdown", "sharpe", "trade_count", "fill_count", "margin_calls", "fees_paid",
              "data_hash"});
    for (const auto& r : reports) {
        const auto& m = r.metrics;
        w.field(r.variant).field(m.total_return).field(m.annualized_return).field(m.benchmark_return)
            .field(m.relative_return);
        if (m.alpha) w.field(*m.alpha);
        else w.empty_field();
        if (m.beta) w.field(*m.beta);
        else w.empty_field();
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.data_hash));
        w.field(m.max_drawdown).field(m.sharpe).field(r.trade_count).field(r.fill_count).field(r.margin_calls)
            .field(r.fees_paid).field(std::string_view(hash)).end_row();
    }
}

}  // namespace flowtox::backtest
