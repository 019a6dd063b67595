#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowtox::marketdata {

/// Nanoseconds since the Unix epoch.
using Timestamp = std::int64_t;
/// Nanoseconds.
using Duration = std::int64_t;

inline constexpr Duration kNanosPerSecond = 1'000'000'000;
inline constexpr Duration kNanosPerMinute = 60 * kNanosPerSecond;
inline constexpr Duration kNanosPerDay = 24 * 60 * kNanosPerMinute;

struct Tick {
    Timestamp ts = 0;
    double price = 0.0;
    std::int64_t volume = 0;
    std::optional<double> bid1;
    std::optional<double> ask1;
};

/// Intraday trading interval in minutes after local midnight, closed on both ends.
struct SessionInterval {
    int open_minute = 0;
    int close_minute = 0;
};

/// Identifies one session instance: a local calendar day and the index of the
/// interval within that day.
struct SessionSlot {
    std::int64_t day = 0;
    int session = 0;
    auto operator<=>(const SessionSlot&) const = default;
};

class SessionCalendar {
public:
    SessionCalendar(std::vector<SessionInterval> sessions, int utc_offset_minutes);

    /// CSI300 index futures: 09:30-11:30 and 13:00-15:00, UTC+8.
    [[nodiscard]] static SessionCalendar csi300();
    /// One session covering the whole UTC day; disables calendar filtering.
    [[nodiscard]] static SessionCalendar all_day();

    [[nodiscard]] std::optional<SessionSlot> locate(Timestamp ts) const;
    [[nodiscard]] bool contains(Timestamp ts) const { return locate(ts).has_value(); }
    [[nodiscard]] std::int64_t local_day(Timestamp ts) const;
    [[nodiscard]] Timestamp session_open(SessionSlot slot) const;
    [[nodiscard]] Timestamp session_close(SessionSlot slot) const;

    [[nodiscard]] const std::vector<SessionInterval>& sessions() const { return sessions_; }
    [[nodiscard]] int utc_offset_minutes() const { return utc_offset_minutes_; }
    /// Total trading minutes in one day.
    [[nodiscard]] int minutes_per_day() const;

private:
    std::vector<SessionInterval> sessions_;
    int utc_offset_minutes_ = 0;
};

/// Validated, time-ordered trade tape for one instrument.
class TickSeries {
public:
    /// Throws DataError naming the offending index when a Tick invariant,
    /// the ordering invariant or the calendar invariant fails.
    TickSeries(std::vector<Tick> ticks, std::string instrument, SessionCalendar calendar);

    [[nodiscard]] std::span<const Tick> ticks() const { return ticks_; }
    [[nodiscard]] std::size_t size() const { return ticks_.size(); }
    [[nodiscard]] bool empty() const { return ticks_.empty(); }
    [[nodiscard]] const Tick& operator[](std::size_t i) const { return ticks_[i]; }
    [[nodiscard]] const std::string& instrument() const { return instrument_; }
    [[nodiscard]] const SessionCalendar& calendar() const { return calendar_; }

    [[nodiscard]] std::vector<double> prices() const;
    [[nodiscard]] std::int64_t total_volume() const;

private:
    std::vector<Tick> ticks_;
    std::string instrument_;
    SessionCalendar calendar_;
};

struct ReturnSeries {
    std::vector<Timestamp> timestamps;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct Bar {
    Timestamp ts = 0;  ///< start of the bar interval
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    std::int64_t volume = 0;
    /// Last level-1 quote seen inside the bar, when the ticks carried quotes.
    std::optional<double> bid1;
    std::optional<double> ask1;
    /// Session instance the bar belongs to.
    SessionSlot slot;
};

struct BarSeries {
    Duration interval = 0;
    std::vector<Bar> bars;

    [[nodiscard]] std::size_t size() const { return bars.size(); }
    [[nodiscard]] std::vector<double> closes() const;
};

/// Supported tick CSV layouts. Header `ts_ns,price,volume[,bid1,ask1]`.
enum class TickCsvSchema {
    Auto,       ///< detect from the header
    Basic,      ///< ts_ns,price,volume
    WithQuotes  ///< ts_ns,price,volume,bid1,ask1
};

[[nodiscard]] TickSeries load_ticks(const std::filesystem::path& path,
                                    TickCsvSchema schema = TickCsvSchema::Auto,
                                    const SessionCalendar& calendar = SessionCalendar::csi300(),
                                    std::string instrument = {});
[[nodiscard]] TickSeries read_ticks(std::istream& in, TickCsvSchema schema,
                                    const SessionCalendar& calendar, std::string instrument);
void write_ticks(std::ostream& out, const TickSeries& ticks);
void write_bars(std::ostream& out, const BarSeries& bars);

/// values[t] = ln(prices[t+1] / prices[t]). Timestamps, when given, label each
/// return with the later price's time.
[[nodiscard]] ReturnSeries log_returns(std::span<const double> prices,
                                       std::span<const Timestamp> timestamps = {});

/// Log returns of consecutive ticks/bars that share a session instance; never
/// spans a session break.
[[nodiscard]] ReturnSeries session_log_returns(const TickSeries& ticks);
[[nodiscard]] ReturnSeries session_log_returns(const BarSeries& bars);

/// OHLCV bars aligned to session open; empty intervals omitted; no bar spans
/// a session break.
[[nodiscard]] BarSeries resample(const TickSeries& ticks, Duration interval);

struct VolumeLaw {
    double log_mean = 1.5;   ///< mean of ln(volume)
    double log_sigma = 0.6;  ///< std of ln(volume)
};

struct SynthSpec {
    double omega = 5e-10;
    double alpha = 0.05;
    double beta = 0.90;
    double mean_return = 0.0;
    VolumeLaw volume;
    std::uint64_t seed = 1;
    std::size_t count = 10'000;
    double initial_price = 3000.0;
    Duration spacing = 500'000'000;  ///< 500 ms between ticks
    double spread = 0.2;             ///< bid1/ask1 = price -/+ spread/2; 0 disables quotes
    std::int64_t start_day = 17533;  ///< local day number of 2018-01-02
    std::string instrument = "IF.SYN";
};

/// Ticks whose log returns follow a GARCH(1,1) with constant mean. Timestamps
/// walk the calendar's sessions on weekdays at fixed spacing.
[[nodiscard]] TickSeries synth_ticks(const SynthSpec& spec,
                                     const SessionCalendar& calendar = SessionCalendar::csi300());

/// The simulated return path behind synth_ticks (exposed for recovery tests).
[[nodiscard]] std::vector<double> synth_garch_returns(const SynthSpec& spec);

struct DescriptiveStats {
    double mean = 0.0;
    double stddev = 0.0;  ///< sample (n-1) standard deviation
    /// Population-moment skewness; empty when the series has zero variance.
    std::optional<double> skewness;
    /// Non-excess kurtosis (normal = 3); empty when the series has zero variance.
    std::optional<double> kurtosis;
    std::size_t n = 0;
};

[[nodiscard]] DescriptiveStats descriptive_stats(std::span<const double> r);

}  // namespace flowtox::marketdata
