#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "flowtox/error.hpp"
#include "flowtox/marketdata.hpp"
#include "test_support.hpp"

using namespace flowtox;
using namespace flowtox::marketdata;
using flowtox::testing::all_day;
using flowtox::testing::kDay0;
using flowtox::testing::tick;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / ("flowtox_md_" + name);
    std::ofstream(p) << body;
    return p;
}

std::string ns(double seconds) {
    return std::to_string(kDay0 + static_cast<std::int64_t>(seconds * 1e9));
}

}  // namespace

TEST(LoadTicks, ThreeRows) {
    const auto p = write_temp("ok.csv", "ts_ns,price,volume\n" + ns(1) + ",10,1\n" + ns(2) + ",11,2\n" + ns(3) +
                                            ",12,3\n");
    const auto ts = load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day());
    ASSERT_EQ(ts.size(), 3u);
    EXPECT_DOUBLE_EQ(ts[1].price, 11.0);
    EXPECT_EQ(ts.total_volume(), 6);
    EXPECT_FALSE(ts[0].bid1.has_value());
}

TEST(LoadTicks, QuotesSchema) {
    const auto p = write_temp("quotes.csv", "ts_ns,price,volume,bid1,ask1\n" + ns(1) + ",10,1,9.8,10.2\n");
    const auto ts = load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day());
    ASSERT_TRUE(ts[0].ask1.has_value());
    EXPECT_DOUBLE_EQ(*ts[0].ask1, 10.2);
}

TEST(LoadTicks, ZeroVolumeNamesRow) {
    const auto p = write_temp("zero.csv", "ts_ns,price,volume\n" + ns(1) + ",10,1\n" + ns(2) + ",10,0\n");
    try {
        (void)load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day());
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(LoadTicks, SwappedTimestamps) {
    const auto p = write_temp("swap.csv", "ts_ns,price,volume\n" + ns(2) + ",10,1\n" + ns(1) + ",10,1\n");
    try {
        (void)load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day());
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("decreasing"), std::string::npos) << e.what();
    }
}

TEST(LoadTicks, EmptyAndMissing) {
    const auto p = write_temp("empty.csv", "");
    EXPECT_THROW((void)load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day()), DataError);
    const auto h = write_temp("header.csv", "ts_ns,price,volume\n");
    EXPECT_THROW((void)load_ticks(h, TickCsvSchema::Auto, SessionCalendar::all_day()), DataError);
    try {
        (void)load_ticks("/nonexistent/flowtox.csv");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/flowtox.csv"), std::string::npos);
    }
}

TEST(LoadTicks, CrossedQuotesRejected) {
    const auto p = write_temp("crossed.csv", "ts_ns,price,volume,bid1,ask1\n" + ns(1) + ",10,1,10.3,10.2\n");
    EXPECT_THROW((void)load_ticks(p, TickCsvSchema::Auto, SessionCalendar::all_day()), DataError);
}

TEST(LoadTicks, OutsideSessionRejected) {
    // 00:00 UTC is 08:00 in Shanghai, before the open.
    const auto p = write_temp("closed.csv", "ts_ns,price,volume\n" + ns(1) + ",10,1\n");
    EXPECT_THROW((void)load_ticks(p), DataError);
}

TEST(LoadTicks, WriteReadRoundTrip) {
    SynthSpec spec;
    spec.count = 500;
    const auto a = synth_ticks(spec);
    std::stringstream ss;
    write_ticks(ss, a);
    const auto b = read_ticks(ss, TickCsvSchema::Auto, SessionCalendar::csi300(), "X");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].ts, b[i].ts);
        EXPECT_EQ(a[i].price, b[i].price);
        EXPECT_EQ(a[i].volume, b[i].volume);
        EXPECT_EQ(a[i].bid1, b[i].bid1);
    }
}

TEST(LogReturns, Examples) {
    const std::vector<double> flat{100, 100};
    EXPECT_EQ(log_returns(flat).values, std::vector<double>{0.0});
    const std::vector<double> up{100, 100 * std::exp(0.01)};
    EXPECT_NEAR(log_returns(up).values[0], 0.01, 1e-12);
    const std::vector<double> half{100, 50};
    EXPECT_NEAR(log_returns(half).values[0], -std::log(2.0), 1e-15);
}

TEST(LogReturns, Errors) {
    const std::vector<double> one{100};
    EXPECT_THROW((void)log_returns(one), DataError);
    const std::vector<double> neg{100, -1};
    EXPECT_THROW((void)log_returns(neg), DataError);
}

TEST(LogReturns, TelescopesToLastPrice) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 500.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(2 + trial * 7);
        for (double& x : p) x = u(rng);
        const auto r = log_returns(p);
        ASSERT_EQ(r.size(), p.size() - 1);
        const double s = std::accumulate(r.values.begin(), r.values.end(), 0.0);
        EXPECT_NEAR(std::exp(s) * p.front() / p.back(), 1.0, 1e-9);
    }
}

TEST(Resample, HandAggregation) {
    const auto ts = all_day({tick(1, 10, 1), tick(2, 12, 2), tick(3, 11, 3)});
    const auto bars = resample(ts, kNanosPerMinute);
    ASSERT_EQ(bars.size(), 1u);
    const auto& b = bars.bars[0];
    EXPECT_EQ(b.open, 10);
    EXPECT_EQ(b.high, 12);
    EXPECT_EQ(b.low, 10);
    EXPECT_EQ(b.close, 11);
    EXPECT_EQ(b.volume, 6);
    EXPECT_EQ(b.ts, kDay0);
}

TEST(Resample, Singleton) {
    const auto bars = resample(all_day({tick(5, 7, 4)}), kNanosPerMinute);
    ASSERT_EQ(bars.size(), 1u);
    const auto& b = bars.bars[0];
    EXPECT_TRUE(b.open == 7 && b.high == 7 && b.low == 7 && b.close == 7);
}

TEST(Resample, EmptyIntervalsOmitted) {
    const auto bars = resample(all_day({tick(1, 10, 1), tick(200, 11, 1)}), kNanosPerMinute);
    ASSERT_EQ(bars.size(), 2u);
    EXPECT_EQ(bars.bars[1].ts - bars.bars[0].ts, 3 * kNanosPerMinute);
}

TEST(Resample, NoBarAcrossSessionBreak) {
    // 11:29 and 13:01 Shanghai time (03:29 and 05:01 UTC).
    std::vector<Tick> v{tick(3 * 3600 + 29 * 60, 10, 1), tick(5 * 3600 + 60, 11, 1)};
    const TickSeries ts(v, "X", SessionCalendar::csi300());
    const auto bars = resample(ts, kNanosPerDay);
    ASSERT_EQ(bars.size(), 2u);
    EXPECT_NE(bars.bars[0].slot, bars.bars[1].slot);
    EXPECT_EQ(bars.bars[1].open, 11);
}

TEST(Resample, Errors) {
    const auto ts = all_day({tick(1, 10, 1)});
    EXPECT_THROW((void)resample(ts, 0), std::invalid_argument);
}

TEST(Resample, VolumeConservationAndShape) {
    SynthSpec spec;
    spec.count = 20000;
    const auto ticks = synth_ticks(spec);
    for (Duration iv : {kNanosPerMinute, 5 * kNanosPerMinute, 7 * kNanosPerSecond}) {
        const auto bars = resample(ticks, iv);
        std::int64_t vol = 0;
        for (const auto& b : bars.bars) {
            vol += b.volume;
            EXPECT_GE(b.high, std::max(b.open, b.close));
            EXPECT_LE(b.low, std::min(b.open, b.close));
        }
        EXPECT_EQ(vol, ticks.total_volume());
    }
}

TEST(SessionReturns, NeverSpanBreaks) {
    SynthSpec spec;
    spec.count = 40000;  // crosses the lunch break and a day boundary
    const auto ticks = synth_ticks(spec);
    const auto r = session_log_returns(ticks);
    std::size_t breaks = 0;
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        if (ticks.calendar().locate(ticks[i].ts) != ticks.calendar().locate(ticks[i - 1].ts)) ++breaks;
    }
    EXPECT_GE(breaks, 2u);
    EXPECT_EQ(r.size(), ticks.size() - 1 - breaks);
}

TEST(Synth, Deterministic) {
    SynthSpec spec;
    spec.count = 3000;
    spec.seed = 11;
    const auto a = synth_ticks(spec);
    const auto b = synth_ticks(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].ts, b[i].ts);
        ASSERT_EQ(a[i].price, b[i].price);
        ASSERT_EQ(a[i].volume, b[i].volume);
    }
    spec.seed = 12;
    EXPECT_NE(synth_ticks(spec)[10].price, a[10].price);
}

TEST(Synth, IidVarianceEqualsOmega) {
    SynthSpec spec;
    spec.alpha = 0.0;
    spec.beta = 0.0;
    spec.omega = 1e-6;
    spec.count = 100001;
    const auto r = synth_garch_returns(spec);
    const auto d = descriptive_stats(r);
    EXPECT_NEAR(d.stddev * d.stddev, spec.omega, 0.05 * spec.omega);
}

TEST(Synth, VarianceApproachesUnconditional) {
    SynthSpec spec;
    spec.omega = 1e-6;
    spec.alpha = 0.05;
    spec.beta = 0.90;
    spec.count = 100001;
    spec.seed = 5;
    const auto r = synth_garch_returns(spec);
    const auto d = descriptive_stats(r);
    const double target = spec.omega / (1 - spec.alpha - spec.beta);
    EXPECT_NEAR(d.stddev * d.stddev, target, 0.10 * target);
}

TEST(Synth, ConstraintErrors) {
    SynthSpec spec;
    spec.count = 1;
    EXPECT_THROW((void)synth_ticks(spec), std::invalid_argument);
    spec.count = 10;
    spec.alpha = 0.5;
    spec.beta = 0.6;
    EXPECT_THROW((void)synth_ticks(spec), std::invalid_argument);
}

TEST(Synth, TicksInsideSessionsWithQuotes) {
    SynthSpec spec;
    spec.count = 30000;
    const auto t = synth_ticks(spec);
    for (const auto& k : t.ticks()) {
        ASSERT_TRUE(t.calendar().contains(k.ts));
        ASSERT_TRUE(k.bid1 && k.ask1);
        ASSERT_LE(*k.bid1, *k.ask1);
        ASSERT_GE(k.volume, 1);
    }
}

TEST(DescriptiveStats, NormalKurtosis) {
    const auto x = flowtox::testing::normals(1'000'000, 2024);
    const auto d = descriptive_stats(x);
    ASSERT_TRUE(d.kurtosis.has_value());
    EXPECT_NEAR(*d.kurtosis, 3.0, 0.05);
    EXPECT_NEAR(*d.skewness, 0.0, 0.02);
    EXPECT_NEAR(d.stddev, 1.0, 0.01);
}

TEST(DescriptiveStats, ConstantAndShort) {
    const std::vector<double> c(10, 0.5);
    const auto d = descriptive_stats(c);
    EXPECT_EQ(d.stddev, 0.0);
    EXPECT_FALSE(d.skewness.has_value());
    EXPECT_FALSE(d.kurtosis.has_value());
    const std::vector<double> s{1, 2, 3};
    EXPECT_THROW((void)descriptive_stats(s), DataError);
}

TEST(DescriptiveStats, HandMoments) {
    const std::vector<double> x{1, 2, 3, 4};
    const auto d = descriptive_stats(x);
    EXPECT_DOUBLE_EQ(d.mean, 2.5);
    EXPECT_NEAR(d.stddev, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(*d.skewness, 0.0, 1e-15);
    // m2 = 1.25, m4 = 2.5625
    EXPECT_NEAR(*d.kurtosis, 2.5625 / (1.25 * 1.25), 1e-12);
}
