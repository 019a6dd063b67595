#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowtox/marketdata.hpp"

namespace flowtox::testing {

using marketdata::kNanosPerSecond;
using marketdata::Tick;
using marketdata::TickSeries;
using marketdata::Timestamp;

// 2018-01-02 00:00 UTC
inline constexpr Timestamp kDay0 = 17533LL * marketdata::kNanosPerDay;

inline Tick tick(double seconds, double price, std::int64_t volume,
                 std::optional<double> bid = std::nullopt, std::optional<double> ask = std::nullopt) {
    Tick t;
    t.ts = kDay0 + static_cast<Timestamp>(seconds * static_cast<double>(kNanosPerSecond));
    t.price = price;
    t.volume = volume;
    t.bid1 = bid;
    t.ask1 = ask;
    return t;
}

inline TickSeries all_day(std::vector<Tick> ticks) {
    return TickSeries(std::move(ticks), "TEST", marketdata::SessionCalendar::all_day());
}

/// Ticks one second apart with the given prices and unit volume.
inline TickSeries from_prices(const std::vector<double>& prices, std::int64_t volume = 1) {
    std::vector<Tick> v;
    for (std::size_t i = 0; i < prices.size(); ++i) v.push_back(tick(static_cast<double>(i), prices[i], volume));
    return all_day(std::move(v));
}

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> out(n);
    for (double& x : out) x = z(rng);
    return out;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto e = normals(n, seed);
    for (std::size_t i = 1; i < n; ++i) e[i] += e[i - 1];
    return e;
}

}  // namespace flowtox::testing
