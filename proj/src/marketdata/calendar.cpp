#include "flowtox/marketdata.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowtox::marketdata {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

SessionCalendar::SessionCalendar(std::vector<SessionInterval> sessions, int utc_offset_minutes)
    : sessions_(std::move(sessions)), utc_offset_minutes_(utc_offset_minutes) {
    if (sessions_.empty()) throw std::invalid_argument("session calendar needs at least one interval");
    int prev_close = -1;
    for (const auto& s : sessions_) {
        if (s.open_minute < 0 || s.close_minute > 24 * 60 || s.open_minute >= s.close_minute) {
            throw std::invalid_argument("session interval must satisfy 0 <= open < close <= 1440");
        }
        if (s.open_minute <= prev_close) {
            throw std::invalid_argument("session intervals must be sorted and disjoint");
        }
        prev_close = s.close_minute;
    }
}

SessionCalendar SessionCalendar::csi300() {
    return SessionCalendar({{9 * 60 + 30, 11 * 60 + 30}, {13 * 60, 15 * 60}}, 8 * 60);
}

SessionCalendar SessionCalendar::all_day() { return SessionCalendar({{0, 24 * 60}}, 0); }

std::int64_t SessionCalendar::local_day(Timestamp ts) const {
    return floor_div(ts + static_cast<std::int64_t>(utc_offset_minutes_) * kNanosPerMinute,
                     kNanosPerDay);
}

std::optional<SessionSlot> SessionCalendar::locate(Timestamp ts) const {
    const Timestamp local = ts + static_cast<std::int64_t>(utc_offset_minutes_) * kNanosPerMinute;
    const std::int64_t day = floor_div(local, kNanosPerDay);
    const Timestamp into_day = local - day * kNanosPerDay;
    for (std::size_t i = 0; i < sessions_.size(); ++i) {
        const Timestamp open = sessions_[i].open_minute * kNanosPerMinute;
        const Timestamp close = sessions_[i].close_minute * kNanosPerMinute;
        if (into_day >= open && into_day <= close) return SessionSlot{day, static_cast<int>(i)};
    }
    return std::nullopt;
}

Timestamp SessionCalendar::session_open(SessionSlot slot) const {
    const auto& s = sessions_.at(static_cast<std::size_t>(slot.session));
    return slot.day * kNanosPerDay + s.open_minute * kNanosPerMinute -
           static_cast<std::int64_t>(utc_offset_minutes_) * kNanosPerMinute;
}

Timestamp SessionCalendar::session_close(SessionSlot slot) const {
    const auto& s = sessions_.at(static_cast<std::size_t>(slot.session));
    return slot.day * kNanosPerDay + s.close_minute * kNanosPerMinute -
           static_cast<std::int64_t>(utc_offset_minutes_) * kNanosPerMinute;
}

int SessionCalendar::minutes_per_day() const {
    int total = 0;
    for (const auto& s : sessions_) total += s.close_minute - s.open_minute;
    return total;
}

}  // namespace flowtox::marketdata
