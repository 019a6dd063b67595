#include <cmath>
#include <stdexcept>
#include <string>

#include "flowtox/error.hpp"
#include "flowtox/marketdata.hpp"
#include "flowtox/simd/kernels.hpp"

namespace flowtox::marketdata {

std::vector<double> BarSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.close);
    return out;
}

ReturnSeries log_returns(std::span<const double> prices, std::span<const Timestamp> timestamps) {
    if (prices.size() < 2) throw DataError("log_returns needs at least 2 prices");
    if (!timestamps.empty() && timestamps.size() != prices.size()) {
        throw std::invalid_argument("log_returns: timestamps and prices differ in length");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw DataError("log_returns: non-positive price at index " + std::to_string(i));
        }
    }
    ReturnSeries out;
    out.values.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        out.values.push_back(std::log(prices[i] / prices[i - 1]));
    }
    if (!timestamps.empty()) out.timestamps.assign(timestamps.begin() + 1, timestamps.end());
    return out;
}

ReturnSeries session_log_returns(const TickSeries& ticks) {
    ReturnSeries out;
    const auto& cal = ticks.calendar();
    std::optional<SessionSlot> prev_slot;
    double prev_price = 0.0;
    for (const auto& t : ticks.ticks()) {
        const auto slot = cal.locate(t.ts);
        if (prev_slot && slot == prev_slot) {
            out.values.push_back(std::log(t.price / prev_price));
            out.timestamps.push_back(t.ts);
        }
        prev_slot = slot;
        prev_price = t.price;
    }
    return out;
}

ReturnSeries session_log_returns(const BarSeries& bars) {
    ReturnSeries out;
    for (std::size_t i = 1; i < bars.bars.size(); ++i) {
        const auto& a = bars.bars[i - 1];
        const auto& b = bars.bars[i];
        if (a.slot != b.slot) continue;
        out.values.push_back(std::log(b.close / a.close));
        out.timestamps.push_back(b.ts);
    }
    return out;
}

BarSeries resample(const TickSeries& ticks, Duration interval) {
    if (interval <= 0) throw std::invalid_argument("resample interval must be positive");
    if (ticks.empty()) throw DataError("resample needs a non-empty tick series");
    const auto& cal = ticks.calendar();
    BarSeries out;
    out.interval = interval;

    SessionSlot cur_slot{};
    std::int64_t cur_index = -1;
    for (const auto& t : ticks.ticks()) {
        const SessionSlot slot = *cal.locate(t.ts);
        const Timestamp open = cal.session_open(slot);
        const std::int64_t index = (t.ts - open) / interval;
        if (out.bars.empty() || slot != cur_slot || index != cur_index) {
            Bar b;
            b.ts = open + index * interval;
            b.open = b.high = b.low = b.close = t.price;
            b.volume = 0;
            b.slot = slot;
            out.bars.push_back(b);
            cur_slot = slot;
            cur_index = index;
        }
        Bar& b = out.bars.back();
        b.high = std::max(b.high, t.price);
        b.low = std::min(b.low, t.price);
        b.close = t.price;
        b.volume += t.volume;
        if (t.bid1) b.bid1 = t.bid1;
        if (t.ask1) b.ask1 = t.ask1;
    }
    return out;
}

DescriptiveStats descriptive_stats(std::span<const double> r) {
    if (r.size() < 4) throw DataError("descriptive_stats needs at least 4 observations");
    DescriptiveStats out;
    out.n = r.size();
    const double n = static_cast<double>(r.size());
    out.mean = simd::sum(r) / n;
    const auto sums = simd::central_sums(r, out.mean);
    out.stddev = std::sqrt(sums.m2 / (n - 1.0));
    const double m2 = sums.m2 / n;
    if (m2 > 0.0) {
        out.skewness = (sums.m3 / n) / std::pow(m2, 1.5);
        out.kurtosis = (sums.m4 / n) / (m2 * m2);
    }
    return out;
}

}  // namespace flowtox::marketdata
