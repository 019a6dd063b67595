#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "flowtox/csv.hpp"
#include "flowtox/error.hpp"
#include "flowtox/simd/kernels.hpp"
#include "flowtox/stats.hpp"
#include "flowtox/vpin.hpp"

namespace flowtox::vpin {

BucketFiller::BucketFiller(double bucket_volume) : bucket_volume_(bucket_volume) {
    if (!(bucket_volume > 0.0) || !std::isfinite(bucket_volume)) {
        throw std::invalid_argument("bucket_volume must be positive");
    }
}

void BucketFiller::push(Timestamp ts, double price, double volume, double delta_p,
                        std::vector<FilledBucket>& completed) {
    double remaining = volume;
    while (remaining > 0.0) {
        if (!open_) {
            current_ = FilledBucket{};
            current_.index = next_index_++;
            current_.start_ts = ts;
            open_ = true;
        }
        const double room = bucket_volume_ - current_.total;
        const double take = std::min(room, remaining);
        current_.fragments.push_back({take, delta_p});
        current_.end_ts = ts;
        current_.end_price = price;
        remaining -= take;
        if (take == room) {
            current_.total = bucket_volume_;
            current_.complete = true;
            completed.push_back(std::move(current_));
            current_ = FilledBucket{};
            open_ = false;
        } else {
            current_.total += take;
        }
    }
}

std::vector<double> price_changes(const marketdata::TickSeries& ticks) {
    std::vector<double> out(ticks.size(), 0.0);
    const auto& cal = ticks.calendar();
    std::optional<marketdata::SessionSlot> prev_slot;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const auto slot = cal.locate(ticks[i].ts);
        if (i > 0 && slot == prev_slot) out[i] = ticks[i].price - ticks[i - 1].price;
        prev_slot = slot;
    }
    return out;
}

std::vector<FilledBucket> bucket_fill(const marketdata::TickSeries& ticks, double bucket_volume) {
    BucketFiller filler(bucket_volume);
    if (ticks.empty()) throw DataError("bucket_fill: empty tick series");
    const auto dp = price_changes(ticks);
    std::vector<FilledBucket> out;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const auto& t = ticks[i];
        filler.push(t.ts, t.price, static_cast<double>(t.volume), dp[i], out);
    }
    if (!filler.pending().fragments.empty()) out.push_back(filler.pending());
    return out;
}

std::pair<double, double> bvc_split(double delta_p, double sigma_dp, double v) {
    if (!(sigma_dp > 0.0)) throw std::invalid_argument("bvc_split: sigma_dp must be positive");
    if (!(v > 0.0)) throw std::invalid_argument("bvc_split: volume must be positive");
    const double vb = v * stats::normal_cdf(delta_p / sigma_dp);
    return {vb, v - vb};
}

VolumeBucket classify(const FilledBucket& bucket, double sigma_dp) {
    if (!(sigma_dp > 0.0)) throw std::invalid_argument("classify: sigma_dp must be positive");
    VolumeBucket out;
    out.index = bucket.index;
    out.total = bucket.total;
    out.start_ts = bucket.start_ts;
    out.end_ts = bucket.end_ts;
    out.end_price = bucket.end_price;
    out.complete = bucket.complete;
    double buy = 0.0;
    for (const auto& f : bucket.fragments) {
        if (f.volume > 0.0) buy += bvc_split(f.delta_p, sigma_dp, f.volume).first;
    }
    out.buy_volume = std::clamp(buy, 0.0, bucket.total);
    out.sell_volume = bucket.total - out.buy_volume;
    return out;
}

std::vector<VolumeBucket> classify(std::span<const FilledBucket> buckets, double sigma_dp) {
    std::vector<VolumeBucket> out;
    out.reserve(buckets.size());
    for (const auto& b : buckets) out.push_back(classify(b, sigma_dp));
    return out;
}

double sigma_delta_p(std::span<const double> changes) {
    if (changes.size() < 2) {
        throw DataError("sigma_delta_p: need at least 2 price changes, got " +
                        std::to_string(changes.size()));
    }
    const double n = static_cast<double>(changes.size());
    const double mean = simd::sum(changes) / n;
    const double var = simd::central_sums(changes, mean).m2 / n;
    if (!(var > 0.0)) throw DataError("sigma_delta_p: price changes have zero dispersion");
    return std::sqrt(var);
}

double sigma_delta_p(const marketdata::TickSeries& ticks) {
    const auto& cal = ticks.calendar();
    std::vector<double> changes;
    changes.reserve(ticks.size());
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        if (cal.locate(ticks[i].ts) == cal.locate(ticks[i - 1].ts)) {
            changes.push_back(ticks[i].price - ticks[i - 1].price);
        }
    }
    return sigma_delta_p(changes);
}

VpinSeries compute_vpin(std::span<const VolumeBucket> buckets, std::size_t window,
                        double bucket_volume) {
    if (window == 0) throw std::invalid_argument("compute_vpin: window must be >= 1");
    if (!(bucket_volume > 0.0)) throw std::invalid_argument("compute_vpin: bucket_volume must be positive");
    std::vector<double> buy;
    std::vector<double> sell;
    std::vector<const VolumeBucket*> kept;
    for (const auto& b : buckets) {
        if (!b.complete) continue;
        buy.push_back(b.buy_volume);
        sell.push_back(b.sell_volume);
        kept.push_back(&b);
    }
    if (kept.size() < window) {
        throw DataError("compute_vpin: " + std::to_string(kept.size()) +
                        " complete buckets, window needs " + std::to_string(window));
    }
    VpinSeries out;
    out.window = window;
    out.bucket_volume = bucket_volume;
    const std::size_t m = kept.size() - window + 1;
    out.values.reserve(m);
    const double denom = static_cast<double>(window) * bucket_volume;
    const std::span<const double> bs(buy);
    const std::span<const double> ss(sell);
    for (std::size_t j = 0; j < m; ++j) {
        const double oi = simd::sum_abs_diff(bs.subspan(j, window), ss.subspan(j, window));
        out.values.push_back(std::clamp(oi / denom, 0.0, 1.0));
        const auto* last = kept[j + window - 1];
        out.bucket_indices.push_back(last->index);
        out.end_ts.push_back(last->end_ts);
    }
    return out;
}

double default_bucket_volume(const marketdata::TickSeries& ticks, std::size_t buckets_per_day) {
    if (buckets_per_day == 0) throw std::invalid_argument("buckets_per_day must be >= 1");
    if (ticks.empty()) throw DataError("default_bucket_volume: empty tick series");
    std::map<std::int64_t, double> daily;
    for (const auto& t : ticks.ticks()) {
        daily[ticks.calendar().local_day(t.ts)] += static_cast<double>(t.volume);
    }
    double total = 0.0;
    for (const auto& [day, v] : daily) total += v;
    const double mean = total / static_cast<double>(daily.size());
    return std::max(1.0, std::round(mean / static_cast<double>(buckets_per_day)));
}

VpinRun run_vpin(const marketdata::TickSeries& ticks, const VpinConfig& cfg) {
    const double v = cfg.bucket_volume > 0.0 ? cfg.bucket_volume
                                             : default_bucket_volume(ticks, cfg.buckets_per_day);
    VpinRun run;
    run.sigma_dp = sigma_delta_p(ticks);
    run.buckets = classify(bucket_fill(ticks, v), run.sigma_dp);
    run.series = compute_vpin(run.buckets, cfg.window, v);
    return run;
}

void write_vpin(std::ostream& out, const VpinSeries& series) {
    csv::Writer w(out);
    w.header({"bucket_end_ts", "vpin"});
    for (std::size_t i = 0; i < series.size(); ++i) {
        w.field(series.end_ts[i]).field(series.values[i]).end_row();
    }
}

}  // namespace flowtox::vpin
