#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "flowtox/backtest.hpp"
#include "flowtox/error.hpp"

namespace flowtox::backtest {

namespace {

std::vector<double> simple_returns(std::span<const double> v) {
    std::vector<double> r;
    r.reserve(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i) r.push_back(v[i] / v[i - 1] - 1.0);
    return r;
}

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double annualize(double total, double years) {
    if (total <= -1.0) return -1.0;
    return std::pow(1.0 + total, 1.0 / years) - 1.0;
}

}  // namespace

double max_drawdown(std::span<const double> equity) {
    double peak = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (double e : equity) {
        peak = std::max(peak, e);
        if (peak > 0.0) worst = std::min(worst, e / peak - 1.0);
    }
    return worst;
}

Metrics compute_metrics(std::span<const double> equity, std::span<const double> benchmark,
                        double periods_per_year) {
    if (equity.size() != benchmark.size()) throw std::invalid_argument("compute_metrics: equity and benchmark lengths differ");
    if (equity.size() < 2) throw DataError("compute_metrics: need at least 2 equity marks");
    if (!(periods_per_year > 0.0)) throw std::invalid_argument("compute_metrics: periods_per_year must be positive");
    if (!(equity.front() > 0.0) || !(benchmark.front() > 0.0)) {
        throw DataError("compute_metrics: starting equity must be positive");
    }
    Metrics m;
    const double years = static_cast<double>(equity.size() - 1) / periods_per_year;
    m.total_return = equity.back() / equity.front() - 1.0;
    m.annualized_return = annualize(m.total_return, years);
    m.benchmark_return = benchmark.back() / benchmark.front() - 1.0;
    m.relative_return = m.total_return - m.benchmark_return;
    m.max_drawdown = max_drawdown(equity);

    const auto re = simple_returns(equity);
    const auto rb = simple_returns(benchmark);
    const double me = mean_of(re);
    const double mb = mean_of(rb);
    double vee = 0.0;
    double vbb = 0.0;
    double ceb = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
        vee += (re[i] - me) * (re[i] - me);
        vbb += (rb[i] - mb) * (rb[i] - mb);
        ceb += (re[i] - me) * (rb[i] - mb);
    }
    if (re.size() > 1) {
        const double sd = std::sqrt(vee / static_cast<double>(re.size() - 1));
        if (sd > 0.0) m.sharpe = me / sd * std::sqrt(periods_per_year);
    }
    if (vbb > 0.0) {
        m.beta = ceb / vbb;
        m.alpha = m.annualized_return - *m.beta * annualize(m.benchmark_return, years);
    }
    return m;
}

double periods_per_year(const marketdata::SessionCalendar& cal, marketdata::Duration bar_interval,
                        std::size_t trading_days) {
    if (bar_interval <= 0) throw std::invalid_argument("periods_per_year: bar interval must be positive");
    const double bars_per_day = static_cast<double>(cal.minutes_per_day()) * static_cast<double>(marketdata::kNanosPerMinute) /
                                static_cast<double>(bar_interval);
    return bars_per_day * static_cast<double>(trading_days);
}

}  // namespace flowtox::backtest
