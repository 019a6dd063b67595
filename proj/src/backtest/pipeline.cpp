#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowtox/backtest.hpp"
#include "flowtox/error.hpp"
#include "flowtox/svm.hpp"

namespace flowtox::backtest {

namespace {

using marketdata::Bar;
using marketdata::BarSeries;
using marketdata::TickSeries;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kLags = 5;
constexpr std::size_t kFeatures = 2 * kLags + 1;
constexpr std::size_t kMinThresholdPoints = 10;

// VPIN replayed in tape order with per-day classification sigma.
struct VpinTape {
    double bucket_volume = 0.0;
    std::vector<Timestamp> bucket_end_ts;      // complete buckets, in order
    std::vector<double> bucket_end_price;
    std::vector<double> bucket_vpin;           // NaN before the window fills
    std::vector<Timestamp> vpin_ts;            // buckets with a VPIN value
    std::vector<double> vpin_values;

    /// Latest VPIN whose bucket ended strictly before ts.
    [[nodiscard]] std::optional<double> at(Timestamp ts) const {
        const auto it = std::lower_bound(vpin_ts.begin(), vpin_ts.end(), ts);
        if (it == vpin_ts.begin()) return std::nullopt;
        return vpin_values[static_cast<std::size_t>(it - vpin_ts.begin()) - 1];
    }
};

VpinTape build_vpin_tape(const TickSeries& ticks, const BacktestConfig& cfg,
                         const std::vector<std::int64_t>& tick_day, std::size_t warmup_days) {
    const std::size_t n = ticks.size();
    std::vector<std::size_t> day_first;  // first tick index of each trading day
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || tick_day[i] != tick_day[i - 1]) day_first.push_back(i);
    }
    day_first.push_back(n);
    const std::size_t days = day_first.size() - 1;

    VpinTape tape;
    if (cfg.vpin.bucket_volume > 0.0) {
        tape.bucket_volume = cfg.vpin.bucket_volume;
    } else {
        const std::size_t wd = std::min(warmup_days, days);
        double vol = 0.0;
        for (std::size_t i = 0; i < day_first[wd]; ++i) vol += static_cast<double>(ticks[i].volume);
        tape.bucket_volume = std::max(
            1.0, std::round(vol / static_cast<double>(wd) / static_cast<double>(cfg.vpin.buckets_per_day)));
    }

    const auto dp = vpin::price_changes(ticks);
    // sigma for day d comes from day d-1; day 0 uses itself.
    std::vector<double> day_sigma(days, 0.0);
    double last_sigma = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
        const std::size_t src = d == 0 ? 0 : d - 1;
        std::vector<double> changes;
        for (std::size_t i = day_first[src] + 1; i < day_first[src + 1]; ++i) {
            if (ticks.calendar().locate(ticks[i].ts) == ticks.calendar().locate(ticks[i - 1].ts)) {
                changes.push_back(dp[i]);
            }
        }
        try {
            last_sigma = vpin::sigma_delta_p(changes);
        } catch (const DataError&) {
            // quiet day: carry the last sigma forward
        }
        day_sigma[d] = last_sigma;
    }
    // Days before the first usable sigma borrow the first one found.
    double first_sigma = 0.0;
    for (double s : day_sigma) {
        if (s > 0.0) {
            first_sigma = s;
            break;
        }
    }
    if (!(first_sigma > 0.0)) throw DataError("backtest: price changes have zero dispersion on every day");
    for (double& s : day_sigma) {
        if (!(s > 0.0)) s = first_sigma;
    }

    vpin::BucketFiller filler(tape.bucket_volume);
    std::vector<vpin::FilledBucket> done;
    std::vector<vpin::VolumeBucket> classified;
    std::size_t day = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && tick_day[i] != tick_day[i - 1]) ++day;
        done.clear();
        filler.push(ticks[i].ts, ticks[i].price, static_cast<double>(ticks[i].volume), dp[i], done);
        for (const auto& b : done) classified.push_back(vpin::classify(b, day_sigma[day]));
    }

    const std::size_t w = cfg.vpin.window;
    tape.bucket_vpin.assign(classified.size(), kNaN);
    for (const auto& b : classified) {
        tape.bucket_end_ts.push_back(b.end_ts);
        tape.bucket_end_price.push_back(b.end_price);
    }
    if (classified.size() >= w) {
        const auto series = vpin::compute_vpin(classified, w, tape.bucket_volume);
        for (std::size_t j = 0; j < series.size(); ++j) {
            tape.bucket_vpin[j + w - 1] = series.values[j];
            tape.vpin_ts.push_back(series.end_ts[j]);
            tape.vpin_values.push_back(series.values[j]);
        }
    }
    return tape;
}

class LayeredPolicy final : public Policy {
public:
    LayeredPolicy(const BarSeries& bars, const VpinTape& tape, const BacktestConfig& cfg,
                  std::vector<std::size_t> day_start)
        : bars_(bars.bars),
          tape_(tape),
          cfg_(cfg),
          layers_(cfg.strategy.layers),
          day_start_(std::move(day_start)),
          z_(bars_.size(), kNaN),
          rs_(bars_.size(), kNaN),
          delta2_(cfg.strategy.delta2),
          delta3_(cfg.strategy.delta3) {}

    void on_day_start(std::size_t t) override {
        const std::size_t d = day_index(t);
        day_max_d1_ = -std::numeric_limits<double>::infinity();
        day_min_d1_ = std::numeric_limits<double>::infinity();
        delta1_.reset();
        refit_garch(d);
        if (!fit_) return;
        rebuild_tracker(d, t);
        if (layers_.svm) train_svm(t);
    }

    Decision decide(std::size_t t) override {
        Decision out;
        out.delta2 = delta2_;
        out.delta3 = delta3_;
        const auto vpin_now = tape_.at(bars_[t].ts);
        out.vpin = vpin_now;
        if (!fit_) {
            out.signal.layer_trace = "garch-unavailable";
            return out;
        }
        advance_to(t);
        const double m = tracker_->next_mean();
        const double h = tracker_->next_variance();
        z_[t] = strategy::predicted_value(m, h);

        calibrate_delta1(t);
        if (!delta1_) {
            out.signal.predicted = z_[t];
            out.signal.layer_trace = "delta1-pending";
            return out;
        }
        const double raw = *delta1_;
        out.delta1_raw = raw;
        double applied = raw;
        std::string vpin_tag;
        if (layers_.vpin && vpin_now) {
            recalibrate_thresholds(t);
            out.delta2 = delta2_;
            out.delta3 = delta3_;
            applied = strategy::adjust_delta1(raw, *vpin_now, delta2_, delta3_, day_max_d1_, day_min_d1_);
            vpin_tag = *vpin_now > delta2_ ? "vpin-high" : *vpin_now < delta3_ ? "vpin-low" : "vpin-mid";
        }
        strategy::Signal sig = strategy::garch_signal(m, h, applied);
        if (!vpin_tag.empty()) sig.layer_trace += ";" + vpin_tag;

        if (layers_.svm && sig.side != Side::None) {
            if (!model_.trained()) {
                sig.layer_trace += ";svm-untrained";
            } else {
                std::vector<double> x;
                if (features(t, vpin_now, x)) sig = strategy::svm_gate(model_, x, std::move(sig));
                else sig.layer_trace += ";svm-skip";
            }
        }
        out.signal = std::move(sig);

        strategy::SizingRule rule;
        rule.base_fraction = cfg_.strategy.position_fraction;
        rule.high_vpin_factor = cfg_.strategy.high_vpin_factor;
        rule.low_vpin_factor = cfg_.strategy.low_vpin_factor;
        rule.max_fraction = cfg_.strategy.max_position_fraction;
        rule.use_vpin = layers_.vpin && vpin_now.has_value();
        out.fraction = strategy::position_size(1.0, vpin_now.value_or(0.5), delta2_, delta3_, rule);
        return out;
    }

private:
    [[nodiscard]] std::size_t day_index(std::size_t t) const {
        const auto it = std::upper_bound(day_start_.begin(), day_start_.end(), t);
        return static_cast<std::size_t>(it - day_start_.begin()) - 1;
    }

    [[nodiscard]] bool linked(std::size_t k) const { return k > 0 && bars_[k].slot == bars_[k - 1].slot; }

    [[nodiscard]] double bar_return(std::size_t k) const { return std::log(bars_[k].close / bars_[k - 1].close); }

    void refit_garch(std::size_t d) {
        const std::size_t from = d > cfg_.garch_window_days ? d - cfg_.garch_window_days : 0;
        std::vector<double> r;
        for (std::size_t k = day_start_[from] + 1; k < day_start_[d]; ++k) {
            if (linked(k)) r.push_back(bar_return(k));
        }
        try {
            volatility::FitOptions opts;
            opts.standard_errors = false;
            fit_ = volatility::fit_garch(r, cfg_.garch, opts);
        } catch (const DataError&) {
            // keep the previous day's model
        } catch (const NumericalError&) {
        }
    }

    // z for bar k from the current state, then fold r_k into the filter.
    void step(std::size_t k) {
        const double m = tracker_->next_mean();
        const double h = tracker_->next_variance();
        z_[k] = strategy::predicted_value(m, h);
        if (linked(k)) {
            const double r = bar_return(k);
            rs_[k] = (r - m) / std::sqrt(h);
            tracker_->update(r);
        } else {
            rs_[k] = kNaN;
        }
    }

    void advance_to(std::size_t t) {
        while (pos_ < t) step(pos_++);
    }

    void rebuild_tracker(std::size_t d, std::size_t t) {
        const std::size_t from = d > cfg_.strategy.svm_training_days ? d - cfg_.strategy.svm_training_days : 0;
        tracker_.emplace(*fit_);
        pos_ = day_start_[from];
        window_begin_ = pos_;
        std::fill(z_.begin(), z_.begin() + static_cast<std::ptrdiff_t>(pos_), kNaN);
        std::fill(rs_.begin(), rs_.begin() + static_cast<std::ptrdiff_t>(pos_), kNaN);
        advance_to(t);
    }

    void calibrate_delta1(std::size_t t) {
        const std::size_t w = cfg_.strategy.delta1_window;
        const std::size_t from = std::max(window_begin_ + 1, t > w ? t - w : std::size_t{0});
        const double tick = cfg_.costs.tick_size;
        std::vector<strategy::CalibrationPoint> pts;
        for (std::size_t k = from; k < t; ++k) {
            if (!linked(k) || !std::isfinite(z_[k])) continue;
            const Bar& p = bars_[k - 1];
            const double buy_px = p.bid1 ? *p.bid1 : p.close + 0.5 * tick;
            const double sell_px = p.ask1 ? *p.ask1 : p.close - 0.5 * tick;
            pts.push_back({z_[k], std::log(bars_[k].close / buy_px), std::log(sell_px / bars_[k].close)});
        }
        if (pts.size() < cfg_.strategy.delta1_min_points) return;
        const double d1 = strategy::calibrate_delta1(pts, cfg_.strategy.delta1_grid, cfg_.strategy.delta1_min_points);
        delta1_ = d1;
        day_max_d1_ = std::max(day_max_d1_, d1);
        day_min_d1_ = std::min(day_min_d1_, d1);
    }

    // Labelled buckets: ended on the previous trading day or later, with the
    // bucket `delay` steps ahead already complete before now.
    void recalibrate_thresholds(std::size_t t) {
        const std::size_t delay = cfg_.strategy.basket_delay;
        const Timestamp now = bars_[t].ts;
        const std::size_t d = day_index(t);
        const Timestamp since = bars_[day_start_[d > 0 ? d - 1 : 0]].ts;
        const auto& ends = tape_.bucket_end_ts;
        const std::size_t lo = static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), since) - ends.begin());
        const std::size_t done = static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), now) - ends.begin());
        if (done <= delay) return;
        const std::size_t hi = done - delay;  // exclusive
        if (lo == label_lo_ && hi == label_hi_) return;
        label_lo_ = lo;
        label_hi_ = hi;
        std::vector<double> v;
        std::vector<double> f;
        for (std::size_t k = lo; k < hi; ++k) {
            if (!std::isfinite(tape_.bucket_vpin[k])) continue;
            const double p1 = tape_.bucket_end_price[k + delay];
            const double p0 = tape_.bucket_end_price[k + delay - 1];
            v.push_back(tape_.bucket_vpin[k]);
            f.push_back(std::abs(p1 / p0 - 1.0));
        }
        if (v.size() < kMinThresholdPoints) return;
        strategy::ThresholdSearch search;
        search.fluct_hi = cfg_.strategy.fluct_hi;
        search.fluct_lo = cfg_.strategy.fluct_lo;
        search.fallback_delta2 = cfg_.strategy.delta2;
        search.fallback_delta3 = cfg_.strategy.delta3;
        search.permutations = cfg_.strategy.threshold_permutations;
        search.seed = cfg_.strategy.seed;
        try {
            const auto th = strategy::calibrate_vpin_thresholds(v, f, search);
            delta2_ = th.delta2;
            delta3_ = th.delta3;
        } catch (const DataError&) {
            // constant VPIN over the window; keep the current pair
        }
    }

    bool features(std::size_t k, const std::optional<double>& vpin, std::vector<double>& x) const {
        if (!vpin || k < kLags) return false;
        x.clear();
        x.reserve(kFeatures);
        for (std::size_t j = 0; j < kLags; ++j) x.push_back(z_[k - j]);
        for (std::size_t j = 1; j <= kLags; ++j) x.push_back(rs_[k - j]);
        x.push_back(*vpin);
        return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
    }

    void train_svm(std::size_t t) {
        model_ = svm::SvmModel{};
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        std::vector<double> x;
        for (std::size_t k = window_begin_ + kLags; k < t; ++k) {
            if (!linked(k)) continue;
            if (!features(k, tape_.at(bars_[k].ts), x)) continue;
            rows.push_back(x);
            labels.push_back(bar_return(k) > 0.0 ? 1 : -1);
        }
        if (rows.size() > cfg_.svm_max_points) {
            const auto drop = static_cast<std::ptrdiff_t>(rows.size() - cfg_.svm_max_points);
            rows.erase(rows.begin(), rows.begin() + drop);
            labels.erase(labels.begin(), labels.begin() + drop);
        }
        if (rows.empty()) return;
        const auto raw = svm::Matrix::from_rows(rows);
        const auto scaler = svm::Standardizer::fit(raw);
        svm::SmoOptions opts;
        opts.C = cfg_.svm_c;
        opts.tol = cfg_.svm_tol;
        try {
            auto res = svm::train_smo(scaler.apply(raw), labels, svm::Kernel::rbf(cfg_.svm_sigma), opts);
            model_ = std::move(res.model);
            model_.scaler = scaler;
        } catch (const DataError&) {
            // one class only: the layer passes signals through today
        } catch (const NumericalError&) {
        }
    }

    const std::vector<Bar>& bars_;
    const VpinTape& tape_;
    const BacktestConfig& cfg_;
    strategy::Layers layers_;
    std::vector<std::size_t> day_start_;

    std::optional<volatility::GarchFit> fit_;
    std::optional<volatility::GarchTracker> tracker_;
    std::size_t pos_ = 0;
    std::size_t window_begin_ = 0;
    std::vector<double> z_;
    std::vector<double> rs_;

    std::optional<double> delta1_;
    double day_max_d1_ = 0.0;
    double day_min_d1_ = 0.0;
    double delta2_;
    double delta3_;
    std::size_t label_lo_ = std::numeric_limits<std::size_t>::max();
    std::size_t label_hi_ = std::numeric_limits<std::size_t>::max();

    svm::SvmModel model_;
};

void fnv(std::uint64_t& h, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

}  // namespace

void BacktestConfig::validate() const {
    strategy.validate();
    costs.validate();
    if (garch_window_days == 0) throw std::invalid_argument("backtest: garch_window_days must be >= 1");
    if (vpin.window == 0 || vpin.buckets_per_day == 0) throw std::invalid_argument("backtest: vpin window and buckets_per_day must be >= 1");
    if (!(svm_sigma > 0.0)) throw std::invalid_argument("backtest: svm_sigma must be positive");
    if (!(svm_c > 0.0)) throw std::invalid_argument("backtest: svm_c must be positive");
    if (!(svm_tol > 0.0)) throw std::invalid_argument("backtest: svm_tol must be positive");
    if (svm_max_points < 2) throw std::invalid_argument("backtest: svm_max_points must be >= 2");
    if (bar_interval <= 0) throw std::invalid_argument("backtest: bar_interval must be positive");
    if (trading_days_per_year == 0) throw std::invalid_argument("backtest: trading_days_per_year must be >= 1");
}

std::uint64_t data_hash(const TickSeries& ticks) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& t : ticks.ticks()) {
        fnv(h, static_cast<std::uint64_t>(t.ts));
        fnv(h, std::bit_cast<std::uint64_t>(t.price));
        fnv(h, static_cast<std::uint64_t>(t.volume));
        fnv(h, t.bid1 ? std::bit_cast<std::uint64_t>(*t.bid1) : 0u);
        fnv(h, t.ask1 ? std::bit_cast<std::uint64_t>(*t.ask1) : 0u);
    }
    return h;
}

BacktestRun run_backtest(const TickSeries& ticks, const BacktestConfig& cfg) {
    cfg.validate();
    if (ticks.empty()) throw DataError("backtest: empty tick series");
    const auto& cal = ticks.calendar();
    std::vector<std::int64_t> tick_day(ticks.size());
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const auto slot = cal.locate(ticks[i].ts);
        if (!slot) throw DataError("backtest: tick outside trading sessions at index " + std::to_string(i));
        tick_day[i] = slot->day;
    }
    const auto bars = marketdata::resample(ticks, cfg.bar_interval);
    std::vector<std::size_t> day_start;
    for (std::size_t k = 0; k < bars.size(); ++k) {
        if (k == 0 || bars.bars[k].slot.day != bars.bars[k - 1].slot.day) day_start.push_back(k);
    }
    const std::size_t warmup = cfg.strategy.svm_training_days;
    if (day_start.size() <= warmup) {
        throw DataError("backtest: " + std::to_string(day_start.size()) + " trading days, warm-up needs " +
                        std::to_string(warmup) + " plus at least one trading day");
    }

    const VpinTape tape = build_vpin_tape(ticks, cfg, tick_day, warmup);
    LayeredPolicy policy(bars, tape, cfg, day_start);
    EngineConfig ec;
    ec.costs = cfg.costs;
    ec.first_bar = day_start[warmup];
    ec.stop_loss_sigmas = cfg.strategy.stop_loss_sigmas;

    BacktestRun run;
    run.engine = run_engine(bars, policy, ec);
    run.bucket_volume = tape.bucket_volume;

    std::vector<double> eq;
    std::vector<double> bm;
    for (const auto& p : run.engine.equity) eq.push_back(p.equity);
    for (const auto& p : run.engine.benchmark) bm.push_back(p.equity);
    auto& rep = run.report;
    rep.variant = cfg.strategy.layers.tag();
    rep.metrics = compute_metrics(eq, bm, periods_per_year(cal, cfg.bar_interval, cfg.trading_days_per_year));
    rep.trade_count = run.engine.trade_signals;
    rep.fill_count = run.engine.fills.size();
    rep.margin_calls = run.engine.margin_calls;
    rep.fees_paid = run.engine.fees_paid;
    rep.data_hash = data_hash(ticks);
    return run;
}

std::vector<BacktestRun> run_variants(const TickSeries& ticks, const BacktestConfig& cfg) {
    cfg.validate();
    std::vector<std::future<BacktestRun>> jobs;
    for (const auto& [v, s] : {std::pair{false, false}, std::pair{false, true}, std::pair{true, false},
                               std::pair{true, true}}) {
        BacktestConfig c = cfg;
        c.strategy.layers.garch = true;
        c.strategy.layers.vpin = v;
        c.strategy.layers.svm = s;
        jobs.push_back(std::async(std::launch::async, [&ticks, c] { return run_backtest(ticks, c); }));
    }
    std::vector<BacktestRun> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace flowtox::backtest
