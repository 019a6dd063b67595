#include <cmath>
#include <random>
#include <stdexcept>

#include "flowtox/marketdata.hpp"

namespace flowtox::marketdata {
namespace {

void validate(const SynthSpec& spec) {
    if (!(spec.omega > 0.0)) throw std::invalid_argument("synth: omega must be > 0");
    if (spec.alpha < 0.0 || spec.beta < 0.0) {
        throw std::invalid_argument("synth: alpha and beta must be >= 0");
    }
    if (!(spec.alpha + spec.beta < 1.0)) {
        throw std::invalid_argument("synth: alpha + beta must be < 1 (covariance stationarity)");
    }
    if (spec.count < 2) throw std::invalid_argument("synth: count must be >= 2");
    if (!(spec.initial_price > 0.0)) throw std::invalid_argument("synth: initial price must be > 0");
    if (spec.spacing <= 0) throw std::invalid_argument("synth: tick spacing must be positive");
    if (spec.spread < 0.0) throw std::invalid_argument("synth: spread must be >= 0");
    if (!(spec.volume.log_sigma >= 0.0)) throw std::invalid_argument("synth: volume sigma must be >= 0");
}

// 0 = Sunday; 1970-01-01 was a Thursday.
int weekday(std::int64_t day) { return static_cast<int>(((day % 7) + 7 + 4) % 7); }

}  // namespace

std::vector<double> synth_garch_returns(const SynthSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> r(spec.count - 1);
    double h = spec.omega / (1.0 - spec.alpha - spec.beta);
    for (double& v : r) {
        const double eps = std::sqrt(h) * z(rng);
        v = spec.mean_return + eps;
        h = spec.omega + spec.alpha * eps * eps + spec.beta * h;
    }
    return r;
}

TickSeries synth_ticks(const SynthSpec& spec, const SessionCalendar& calendar) {
    const std::vector<double> r = synth_garch_returns(spec);

    // Volumes come from an independent stream so the return path for a given
    // seed does not depend on the volume law.
    std::mt19937_64 vol_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::lognormal_distribution<double> vol(spec.volume.log_mean, spec.volume.log_sigma);

    std::vector<Tick> ticks;
    ticks.reserve(spec.count);

    std::int64_t day = spec.start_day;
    std::size_t session = 0;
    Timestamp ts = 0;
    bool started = false;
    const auto& sessions = calendar.sessions();
    const auto skip_weekend = [&] {
        while (weekday(day) == 0 || weekday(day) == 6) ++day;
    };
    skip_weekend();

    double log_price = std::log(spec.initial_price);
    for (std::size_t i = 0; i < spec.count; ++i) {
        if (!started) {
            ts = calendar.session_open({day, 0});
            started = true;
        } else {
            ts += spec.spacing;
            const SessionSlot slot{day, static_cast<int>(session)};
            if (ts > calendar.session_close(slot)) {
                ++session;
                if (session == sessions.size()) {
                    session = 0;
                    ++day;
                    skip_weekend();
                }
                ts = calendar.session_open({day, static_cast<int>(session)});
            }
        }
        if (i > 0) log_price += r[i - 1];
        Tick t;
        t.ts = ts;
        t.price = std::exp(log_price);
        t.volume = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(vol(vol_rng))));
        if (spec.spread > 0.0) {
            t.bid1 = t.price - spec.spread / 2.0;
            t.ask1 = t.price + spec.spread / 2.0;
            if (!(*t.bid1 > 0.0)) t.bid1.reset();
        }
        ticks.push_back(t);
    }
    return TickSeries(std::move(ticks), spec.instrument, calendar);
}

}  // namespace flowtox::marketdata
