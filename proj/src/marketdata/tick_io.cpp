#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "flowtox/csv.hpp"
#include "flowtox/error.hpp"
#include "flowtox/marketdata.hpp"

namespace flowtox::marketdata {
namespace {

// Returns an empty string when the tick is valid, otherwise the reason.
std::string tick_violation(const Tick& t) {
    if (!(t.price > 0.0) || !std::isfinite(t.price)) return "price must be positive";
    if (t.volume < 1) return "volume must be >= 1";
    if (t.bid1 && !(*t.bid1 > 0.0)) return "bid1 must be positive";
    if (t.ask1 && !(*t.ask1 > 0.0)) return "ask1 must be positive";
    if (t.bid1 && t.ask1 && *t.bid1 > *t.ask1) return "bid1 exceeds ask1";
    return {};
}

}  // namespace

TickSeries::TickSeries(std::vector<Tick> ticks, std::string instrument, SessionCalendar calendar)
    : ticks_(std::move(ticks)), instrument_(std::move(instrument)), calendar_(std::move(calendar)) {
    for (std::size_t i = 0; i < ticks_.size(); ++i) {
        if (auto why = tick_violation(ticks_[i]); !why.empty()) {
            throw DataError("tick " + std::to_string(i) + ": " + why);
        }
        if (i > 0 && ticks_[i].ts < ticks_[i - 1].ts) {
            throw DataError("tick " + std::to_string(i) + ": timestamps decreasing");
        }
        if (!calendar_.contains(ticks_[i].ts)) {
            throw DataError("tick " + std::to_string(i) + ": timestamp outside trading sessions");
        }
    }
}

std::vector<double> TickSeries::prices() const {
    std::vector<double> out;
    out.reserve(ticks_.size());
    for (const auto& t : ticks_) out.push_back(t.price);
    return out;
}

std::int64_t TickSeries::total_volume() const {
    std::int64_t v = 0;
    for (const auto& t : ticks_) v += t.volume;
    return v;
}

TickSeries read_ticks(std::istream& in, TickCsvSchema schema, const SessionCalendar& calendar,
                      std::string instrument) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("tick CSV is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = csv::split(line);
    const bool basic_header = header.size() == 3 && header[0] == "ts_ns" &&
                              header[1] == "price" && header[2] == "volume";
    const bool quote_header = header.size() == 5 && header[0] == "ts_ns" &&
                              header[1] == "price" && header[2] == "volume" &&
                              header[3] == "bid1" && header[4] == "ask1";
    if (schema == TickCsvSchema::Auto) {
        if (basic_header) schema = TickCsvSchema::Basic;
        else if (quote_header) schema = TickCsvSchema::WithQuotes;
        else throw DataError("line 1: unrecognised tick CSV header '" + line + "'");
    } else if ((schema == TickCsvSchema::Basic && !basic_header) ||
               (schema == TickCsvSchema::WithQuotes && !quote_header)) {
        throw DataError("line 1: header does not match the declared tick schema");
    }
    const std::size_t expected_cols = schema == TickCsvSchema::Basic ? 3 : 5;

    std::vector<Tick> ticks;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        const auto fail = [&](const std::string& why) {
            return DataError("line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() != expected_cols) {
            throw fail("expected " + std::to_string(expected_cols) + " fields, got " +
                       std::to_string(fields.size()));
        }
        Tick t;
        const auto ts = csv::parse_int(fields[0]);
        const auto price = csv::parse_double(fields[1]);
        const auto volume = csv::parse_int(fields[2]);
        if (!ts) throw fail("malformed ts_ns");
        if (!price) throw fail("malformed price");
        if (!volume) throw fail("malformed volume");
        t.ts = *ts;
        t.price = *price;
        t.volume = *volume;
        if (expected_cols == 5) {
            // Empty quote fields are allowed (no quote at that trade).
            if (!fields[3].empty()) {
                const auto bid = csv::parse_double(fields[3]);
                if (!bid) throw fail("malformed bid1");
                t.bid1 = *bid;
            }
            if (!fields[4].empty()) {
                const auto ask = csv::parse_double(fields[4]);
                if (!ask) throw fail("malformed ask1");
                t.ask1 = *ask;
            }
        }
        if (auto why = tick_violation(t); !why.empty()) throw fail(why);
        if (!ticks.empty() && t.ts < ticks.back().ts) throw fail("timestamps decreasing");
        if (!calendar.contains(t.ts)) throw fail("timestamp outside trading sessions");
        ticks.push_back(t);
    }
    if (ticks.empty()) throw DataError("tick CSV has no data rows");
    return TickSeries(std::move(ticks), std::move(instrument), calendar);
}

TickSeries load_ticks(const std::filesystem::path& path, TickCsvSchema schema,
                      const SessionCalendar& calendar, std::string instrument) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open tick file: " + path.string());
    if (instrument.empty()) instrument = path.stem().string();
    try {
        return read_ticks(in, schema, calendar, std::move(instrument));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_ticks(std::ostream& out, const TickSeries& ticks) {
    bool quotes = false;
    for (const auto& t : ticks.ticks()) {
        if (t.bid1 || t.ask1) {
            quotes = true;
            break;
        }
    }
    csv::Writer w(out);
    if (quotes) w.header({"ts_ns", "price", "volume", "bid1", "ask1"});
    else w.header({"ts_ns", "price", "volume"});
    for (const auto& t : ticks.ticks()) {
        w.field(t.ts).field(t.price).field(t.volume);
        if (quotes) {
            if (t.bid1) w.field(*t.bid1); else w.empty_field();
            if (t.ask1) w.field(*t.ask1); else w.empty_field();
        }
        w.end_row();
    }
}

void write_bars(std::ostream& out, const BarSeries& bars) {
    csv::Writer w(out);
    w.header({"ts_ns", "open", "high", "low", "close", "volume"});
    for (const auto& b : bars.bars) {
        w.field(b.ts).field(b.open).field(b.high).field(b.low).field(b.close).field(b.volume);
        w.end_row();
    }
}

}  // namespace flowtox::marketdata
