#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "flowtox/marketdata.hpp"

namespace flowtox::vpin {

using marketdata::Timestamp;

/// Part of one trade assigned to a bucket. A trade that crosses a bucket
/// boundary is split pro-rata; each piece keeps the trade's price change.
struct Fragment {
    double volume = 0.0;
    double delta_p = 0.0;
};

/// Equal-volume bucket before buy/sell classification.
struct FilledBucket {
    std::size_t index = 0;
    double total = 0.0;
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;
    double end_price = 0.0;
    bool complete = false;
    std::vector<Fragment> fragments;
};

/// Equal-volume bucket with bulk-classified volume. sell_volume is defined as
/// total - buy_volume, so buy + sell == total exactly.
struct VolumeBucket {
    std::size_t index = 0;
    double buy_volume = 0.0;
    double sell_volume = 0.0;
    double total = 0.0;
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;
    double end_price = 0.0;
    bool complete = false;

    [[nodiscard]] double imbalance() const { return buy_volume > sell_volume ? buy_volume - sell_volume : sell_volume - buy_volume; }
};

/// Rolling order-flow toxicity over complete buckets.
///
/// Reading through the information-event model: with event probability
/// alpha, informed arrival rate mu and uninformed rate epsilon per side,
/// E[|V_B - V_S|] ~ alpha*mu and E[V] = alpha*mu + 2*epsilon, so the ratio
/// estimates alpha*mu / (alpha*mu + 2*epsilon). Those latent parameters are
/// not estimated here.
struct VpinSeries {
    std::vector<double> values;             ///< each in [0, 1]
    std::vector<std::size_t> bucket_indices;  ///< last bucket in each window
    std::vector<Timestamp> end_ts;          ///< end of that bucket
    std::size_t window = 0;
    double bucket_volume = 0.0;

    [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// Sequential bucket fold; shared by the batch API and the backtest replay.
class BucketFiller {
public:
    explicit BucketFiller(double bucket_volume);

    /// Adds one trade; appends any buckets completed by it to `completed`.
    void push(Timestamp ts, double price, double volume, double delta_p,
              std::vector<FilledBucket>& completed);

    /// The partially filled trailing bucket (may be empty).
    [[nodiscard]] const FilledBucket& pending() const { return current_; }
    [[nodiscard]] double bucket_volume() const { return bucket_volume_; }

private:
    double bucket_volume_;
    FilledBucket current_;
    std::size_t next_index_ = 0;
    bool open_ = false;
};

/// Tick-to-tick trade price changes; zero on the first tick of every session.
[[nodiscard]] std::vector<double> price_changes(const marketdata::TickSeries& ticks);

/// Partitions the tape into buckets of `bucket_volume`. The last element is
/// the incomplete remainder when the volume does not divide evenly.
[[nodiscard]] std::vector<FilledBucket> bucket_fill(const marketdata::TickSeries& ticks,
                                                    double bucket_volume);

/// Bulk volume classification of one trade: v_b = v * Phi(dp / sigma).
[[nodiscard]] std::pair<double, double> bvc_split(double delta_p, double sigma_dp, double v);

[[nodiscard]] VolumeBucket classify(const FilledBucket& bucket, double sigma_dp);
[[nodiscard]] std::vector<VolumeBucket> classify(std::span<const FilledBucket> buckets,
                                                 double sigma_dp);

/// Standard deviation (population convention) of the within-session price
/// changes. Needs at least two changes and a non-zero spread.
[[nodiscard]] double sigma_delta_p(const marketdata::TickSeries& ticks);
[[nodiscard]] double sigma_delta_p(std::span<const double> changes);

/// VPIN over complete buckets: mean of |V_B - V_S| over the last `window`
/// buckets divided by bucket_volume. Incomplete buckets are skipped.
[[nodiscard]] VpinSeries compute_vpin(std::span<const VolumeBucket> buckets, std::size_t window,
                                      double bucket_volume);

/// Mean daily traded volume divided by buckets_per_day, rounded to a whole
/// number of contracts (at least 1).
[[nodiscard]] double default_bucket_volume(const marketdata::TickSeries& ticks,
                                           std::size_t buckets_per_day);

struct VpinConfig {
    std::size_t buckets_per_day = 50;
    std::size_t window = 50;
    /// 0 selects default_bucket_volume().
    double bucket_volume = 0.0;
};

struct VpinRun {
    std::vector<VolumeBucket> buckets;  ///< complete and trailing incomplete
    VpinSeries series;
    double sigma_dp = 0.0;
};

/// Full pipeline over one tape with a single sigma for the whole sample.
[[nodiscard]] VpinRun run_vpin(const marketdata::TickSeries& ticks, const VpinConfig& cfg);

/// CSV `bucket_end_ts,vpin`.
void write_vpin(std::ostream& out, const VpinSeries& series);

}  // namespace flowtox::vpin
