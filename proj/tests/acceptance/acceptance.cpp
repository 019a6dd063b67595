// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowtox/backtest.hpp"
#include "flowtox/denoise.hpp"
#include "flowtox/error.hpp"
#include "flowtox/stats.hpp"
#include "flowtox/svm.hpp"
#include "flowtox/volatility.hpp"
#include "flowtox/vpin.hpp"
#include "test_support.hpp"

using namespace flowtox;
namespace fs = std::filesystem;
using flowtox::testing::normals;
using flowtox::testing::random_walk;

namespace {

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        failed_ |= !ok;
    }
    void note(const std::string& s) { notes_.push_back(s); }
    [[nodiscard]] bool ok() const { return !failed_; }
    [[nodiscard]] const std::vector<std::string>& failures() const { return failures_; }
    [[nodiscard]] const std::vector<std::string>& notes() const { return notes_; }

private:
    bool failed_ = false;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

marketdata::TickSeries regular_tape(std::size_t n, const std::function<double(std::size_t)>& price) {
    std::vector<marketdata::Tick> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i].ts = flowtox::testing::kDay0 + static_cast<std::int64_t>(i) * 50'000'000;  // 20 ticks/s
        v[i].price = price(i);
        v[i].volume = 1;
    }
    return {std::move(v), "ACC", marketdata::SessionCalendar::all_day()};
}

// 1 --------------------------------------------------------------------------
void vpin_bounds(Check& c) {
    marketdata::SynthSpec spec;
    spec.count = 1'000'000;
    spec.seed = 11;
    const auto ticks = marketdata::synth_ticks(spec);
    const auto run = vpin::run_vpin(ticks, {});
    c.expect(run.series.size() > 0, "no VPIN values");
    for (double v : run.series.values) c.expect(v >= 0.0 && v <= 1.0, "VPIN outside [0,1]: " + fmt(v));
    double total = 0.0;
    for (const auto& b : run.buckets) {
        total += b.total;
        c.expect(b.buy_volume + b.sell_volume == b.total || std::abs(b.buy_volume + b.sell_volume - b.total) <= 1e-9 * b.total,
                 "bucket buy+sell != total");
    }
    for (std::size_t i = 0; i + 1 < run.buckets.size(); ++i)
        c.expect(run.buckets[i].total == run.series.bucket_volume, "complete bucket volume differs");
    c.expect(total == static_cast<double>(ticks.total_volume()),
             "volume not conserved: " + fmt(total) + " vs " + std::to_string(ticks.total_volume()));
    c.note("synthetic: " + std::to_string(run.series.size()) + " values, max " +
           fmt(*std::max_element(run.series.values.begin(), run.series.values.end())));

    const auto balanced = vpin::run_vpin(regular_tape(1'000'000, [](std::size_t i) { return i % 2 ? 101.0 : 100.0; }), {});
    const double bmax = *std::max_element(balanced.series.values.begin(), balanced.series.values.end());
    c.expect(bmax < 0.05, "balanced VPIN max " + fmt(bmax));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
    std::vector<double> prices(1'000'000);
    prices[0] = 100.0;
    for (std::size_t i = 1; i < prices.size(); ++i) prices[i] = prices[i - 1] + 1.0 + jitter(rng);
    const auto buys = vpin::run_vpin(regular_tape(prices.size(), [&](std::size_t i) { return prices[i]; }), {});
    const double amin = *std::min_element(buys.series.values.begin(), buys.series.values.end());
    c.expect(amin > 0.999, "all-buy VPIN min " + fmt(amin));
    c.note("balanced max " + fmt(bmax) + ", all-buy min " + fmt(amin));
}

// 2 --------------------------------------------------------------------------
void garch_recovery(Check& c) {
    using namespace volatility;
    GarchSpec spec;
    GarchParams truth;
    truth.mean = {0.0};
    truth.omega = 1e-6;
    truth.alphas = {0.05};
    truth.gammas = {0.90};
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto r = simulate(spec, truth, 20000, seed);
        const auto fit = fit_garch(r, spec, {.standard_errors = false});
        const bool ok = std::abs(fit.params.alphas[0] - 0.05) <= 0.03 && std::abs(fit.params.gammas[0] - 0.90) <= 0.03;
        within += ok;
        c.expect(fit.persistence < 1.0, "persistence >= 1 at seed " + std::to_string(seed));
    }
    c.expect(within >= 18, "only " + std::to_string(within) + "/20 seeds within 0.03");
    c.note(std::to_string(within) + "/20 seeds within +-0.03");

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (bool leverage : {false, true}) {
        GarchSpec s = spec;
        s.leverage = leverage;
        const auto r = simulate(spec, truth, 5000, 99);
        for (int point = 0; point < 10; ++point) {
            GarchParams p;
            p.mean = {(u(rng) - 0.5) * 2e-4};
            p.omega = 2e-7 + 4e-6 * u(rng);
            p.alphas = {0.02 + 0.15 * u(rng)};
            if (leverage) p.leverage = 0.1 * u(rng);
            p.gammas = {0.5 + 0.3 * u(rng)};
            const auto g = garch_gradient(r, s, p);
            auto theta = p.pack(s);
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double h = 1e-4 * std::max(std::abs(theta[k]), k == 0 ? 1e-4 : 1e-7);
                auto tp = theta, tm = theta;
                tp[k] += h;
                tm[k] -= h;
                const double fd = (garch_log_likelihood(r, s, GarchParams::unpack(s, tp)) -
                                   garch_log_likelihood(r, s, GarchParams::unpack(s, tm))) / (2 * h);
                const double rel = std::abs(g[k] - fd) / std::max({std::abs(g[k]), std::abs(fd), 1e-3});
                worst = std::max(worst, rel);
            }
        }
    }
    c.expect(worst <= 1e-5, "gradient relative error " + fmt(worst));
    c.note("worst gradient relative error " + fmt(worst));
}

// 3 --------------------------------------------------------------------------
void size_power(Check& c) {
    int noise_rejects = 0, walk_accepts = 0;
    for (int s = 0; s < 200; ++s) {
        const auto w = stats::adf_test(normals(5000, 300 + s), 4);
        noise_rejects += w.statistic < (*w.critical_values)[0];
        const auto rw = stats::adf_test(random_walk(5000, 600 + s), 4);
        walk_accepts += rw.statistic >= (*rw.critical_values)[1];
    }
    c.expect(noise_rejects >= 180, "ADF white-noise rejections " + std::to_string(noise_rejects) + "/200");
    c.expect(walk_accepts >= 180, "ADF random-walk non-rejections " + std::to_string(walk_accepts) + "/200");

    int causal = 0;
    for (int s = 0; s < 100; ++s) {
        const auto x = normals(2000, 100 + s);
        const auto e = normals(2000, 200 + s);
        std::vector<double> y(2000, 0.0);
        for (std::size_t t = 1; t < y.size(); ++t) y[t] = 0.5 * y[t - 1] + 0.3 * x[t - 1] + e[t];
        causal += stats::granger_test(x, y, 2).x_causes_y.p_value < 0.01;
    }
    c.expect(causal == 100, "Granger causal rejections at 1%: " + std::to_string(causal) + "/100");

    int size = 0;
    for (int s = 0; s < 1000; ++s)
        size += stats::granger_test(normals(400, 70000 + s), normals(400, 90000 + s), 2).x_causes_y.reject_at_5pct;
    c.expect(size >= 40 && size <= 65, "Granger size " + fmt(size / 10.0) + "%");
    c.note("ADF " + std::to_string(noise_rejects) + "/200 and " + std::to_string(walk_accepts) +
           "/200, Granger power " + std::to_string(causal) + "/100, size " + fmt(size / 10.0) + "%");
}

// 4 --------------------------------------------------------------------------
void wavelet(Check& c) {
    using namespace denoise;
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> len(2, 4096);
    std::vector<std::size_t> lengths{2, 3, 4, 5, 7, 8, 63, 64, 65, 1000, 1024, 4095, 4096};
    for (int i = 0; i < 100; ++i) lengths.push_back(len(rng));
    double worst = 0.0, worst_energy = 0.0;
    for (std::size_t n : lengths) {
        const auto x = normals(n, n + 17);
        for (std::size_t level = 1; level <= max_level(n); ++level) {
            const auto d = haar_dwt(x, level);
            const auto y = haar_idwt(d);
            c.expect(y.size() == n, "length changed");
            for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(y[k] - x[k]));
            if (std::none_of(d.padded.begin(), d.padded.end(), [](bool b) { return b; })) {
                double ex = 0.0, ed = 0.0;
                for (double v : x) ex += v * v;
                for (double v : d.approximation) ed += v * v;
                for (const auto& lv : d.details)
                    for (double v : lv) ed += v * v;
                worst_energy = std::max(worst_energy, std::abs(ed / ex - 1.0));
            }
        }
    }
    c.expect(worst <= 1e-10, "reconstruction error " + fmt(worst));
    c.expect(worst_energy <= 1e-9, "energy error " + fmt(worst_energy));

    const std::size_t n = 4096;
    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) clean[i] = (i / 512) % 2 ? 4.0 : -2.0 + static_cast<double>(i / 1024);
    double power = 0.0;
    for (double v : clean) power += v * v;
    const auto e = normals(n, 2718, std::sqrt(power / n) / 10.0);
    std::vector<double> noisy(n);
    for (std::size_t i = 0; i < n; ++i) noisy[i] = clean[i] + e[i];
    const auto res = denoise::denoise(noisy, 6, ThresholdMode::Estimated);
    double mse_noisy = 0.0, mse_den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mse_noisy += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
        mse_den += (res.signal[i] - clean[i]) * (res.signal[i] - clean[i]);
    }
    const double reduction = 1.0 - mse_den / mse_noisy;
    c.expect(reduction >= 0.30, "MSE reduction " + fmt(100 * reduction) + "%");
    c.note("max reconstruction error " + fmt(worst) + ", energy " + fmt(worst_energy) + ", MSE reduction " +
           fmt(100 * reduction) + "%");
}

// 5 --------------------------------------------------------------------------
void smo(Check& c) {
    using namespace svm;
    const auto acc = [](const SvmModel& m, const Matrix& X, const std::vector<int>& y) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < X.rows; ++i) ok += m.predict(X.row(i)) == y[i];
        return static_cast<double>(ok) / static_cast<double>(X.rows);
    };
    const auto sep = Matrix::from_rows({{2, 2}, {3, 3}, {-2, -2}, {-3, -3}});
    const std::vector<int> ysep{1, 1, -1, -1};
    c.expect(acc(train_smo(sep, ysep, Kernel::linear(), {.C = 10.0}).model, sep, ysep) == 1.0, "separable fixture");
    const auto xo = Matrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const std::vector<int> yxor{-1, -1, 1, 1};
    c.expect(acc(train_smo(xo, yxor, Kernel::rbf(1.0), {.C = 100.0}).model, xo, yxor) == 1.0, "XOR fixture");

    const double tol = 1e-3, C = 10.0;
    double worst_kkt = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t d = 2 + s % 4;
        std::vector<double> w(d);
        for (double& v : w) v = z(rng);
        const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        std::vector<std::vector<double>> rows;
        std::vector<int> y;
        while (rows.size() < 80) {
            std::vector<double> x(d);
            for (double& v : x) v = z(rng);
            const double m = std::inner_product(w.begin(), w.end(), x.begin(), 0.0) / norm;
            if (std::abs(m) < 0.3) continue;
            rows.push_back(x);
            y.push_back(m > 0 ? 1 : -1);
        }
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) continue;
        const auto X = Matrix::from_rows(rows);
        const auto res = train_smo(X, y, Kernel::rbf(1.5), {.C = C, .tol = tol, .record_objective = true});
        double balance = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) {
            const double a = res.alphas[i];
            c.expect(a >= 0.0 && a <= C, "alpha outside box");
            balance += a * y[i];
            const double yf = y[i] * res.model.decision(X.row(i));
            double viol = 0.0;
            if (a == 0.0) viol = std::max(0.0, 1.0 - yf);
            else if (a == C) viol = std::max(0.0, yf - 1.0);
            else viol = std::abs(yf - 1.0);
            worst_kkt = std::max(worst_kkt, viol);
        }
        c.expect(std::abs(balance) <= tol, "sum alpha*y = " + fmt(balance));
        c.expect(acc(res.model, X, y) == 1.0, "random separable problem not fitted");
        for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
            c.expect(res.objective_trace[k] >= res.objective_trace[k - 1] - 1e-12,
                     "dual objective decreased at iteration " + std::to_string(k));
    }
    c.expect(worst_kkt <= tol, "KKT residual " + fmt(worst_kkt));
    c.note("worst KKT residual " + fmt(worst_kkt));
}

// 6 --------------------------------------------------------------------------
marketdata::BarSeries flat_bars(const std::vector<double>& closes, std::size_t per_day) {
    marketdata::BarSeries s;
    s.interval = marketdata::kNanosPerMinute;
    for (std::size_t i = 0; i < closes.size(); ++i) {
        marketdata::Bar b;
        const auto day = static_cast<std::int64_t>(i / per_day);
        b.ts = day * marketdata::kNanosPerDay + static_cast<std::int64_t>(i % per_day) * marketdata::kNanosPerMinute;
        b.open = b.high = b.low = b.close = closes[i];
        b.volume = 1;
        b.slot = {day, 0};
        s.bars.push_back(b);
    }
    return s;
}

class RandomPolicy final : public backtest::Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    backtest::Decision decide(std::size_t) override {
        backtest::Decision d;
        const int r = std::uniform_int_distribution<int>(0, 9)(rng_);
        if (r == 0) d.signal.side = strategy::Side::Buy;
        else if (r == 1) d.signal.side = strategy::Side::Sell;
        d.signal.quote = d.signal.side == strategy::Side::Sell ? strategy::Quote::Ask1 : strategy::Quote::Bid1;
        d.quantity = std::uniform_int_distribution<std::int64_t>(1, 5)(rng_);
        return d;
    }

private:
    std::mt19937_64 rng_;
};

class OneTrip final : public backtest::Policy {
public:
    backtest::Decision decide(std::size_t bar) override {
        backtest::Decision d;
        if (bar == 2) {
            d.signal.side = strategy::Side::Buy;
            d.signal.quote = strategy::Quote::Bid1;
            d.quantity = 1;
        }
        return d;
    }
};

void accounting(Check& c) {
    using namespace backtest;
    std::vector<double> closes(100'001);
    closes[0] = 3000.0;
    const auto steps = normals(closes.size(), 66, 2.0);
    for (std::size_t i = 1; i < closes.size(); ++i) closes[i] = std::max(100.0, closes[i - 1] + steps[i]);
    const auto bars = flat_bars(closes, 1000);
    RandomPolicy policy(8);
    EngineConfig cfg;
    cfg.costs.tick_size = 0.2;
    const auto r = run_engine(bars, policy, cfg);
    double worst = 0.0, fees = 0.0, pnl = 0.0;
    for (const auto& f : r.fills) {
        worst = std::max(worst, std::abs(f.cash_delta + f.margin_delta + f.fee - f.realized_pnl));
        fees += f.fee;
        pnl += f.realized_pnl;
    }
    const double ledger = r.final_cash - (cfg.costs.capital + pnl - fees);
    worst = std::max(worst, std::abs(ledger));
    c.expect(r.fills.size() > 1000, "too few fills: " + std::to_string(r.fills.size()));
    c.expect(worst < 1e-6, "double-entry residual " + fmt(worst));
    c.note(std::to_string(r.fills.size()) + " fills over " + std::to_string(bars.bars.size()) +
           " bars, worst residual " + fmt(worst));

    NullPolicy null;
    const auto z = run_engine(bars, null, cfg);
    std::vector<double> eq, bm;
    for (std::size_t i = 0; i < z.equity.size(); ++i) {
        eq.push_back(z.equity[i].equity);
        bm.push_back(z.benchmark[i].equity);
    }
    c.expect(compute_metrics(eq, bm, 60480).total_return == 0.0, "null strategy return is not 0");

    OneTrip trip;
    EngineConfig fee_cfg;
    fee_cfg.costs.fee_bps = 6.87;
    fee_cfg.costs.tick_size = 0.0;
    const auto f = run_engine(flat_bars(std::vector<double>(6, 3000.0), 1000), trip, fee_cfg);
    c.expect(f.fills.size() == 2, "fee example fill count");
    c.expect(f.fees_paid == 1236.6, "fee example " + fmt(f.fees_paid));
    c.expect(std::abs(f.realized_pnl) == 0.0, "fee example gross pnl");
    const std::vector<double> dd{1.0, 0.5, 0.75};
    c.expect(max_drawdown(dd) == -0.5, "drawdown fixture " + fmt(max_drawdown(dd)));
    c.note("fee example " + fmt(f.fees_paid));
}

// 7, 8 -----------------------------------------------------------------------
backtest::BacktestConfig small_config() {
    backtest::BacktestConfig cfg;
    cfg.strategy.svm_training_days = 2;
    cfg.garch_window_days = 2;
    cfg.svm_max_points = 400;
    return cfg;
}

marketdata::TickSeries small_tape(std::uint64_t seed, std::size_t days) {
    marketdata::SynthSpec spec;
    spec.seed = seed;
    spec.spacing = 5 * marketdata::kNanosPerSecond;
    spec.count = days * 2 * (7200 / 5 + 1);
    spec.omega = 2e-8;
    spec.alpha = 0.08;
    spec.beta = 0.9;
    spec.spread = 0.2;
    return marketdata::synth_ticks(spec);
}

bool finite_metrics(const backtest::Metrics& m) {
    return std::isfinite(m.total_return) && std::isfinite(m.annualized_return) && std::isfinite(m.benchmark_return) &&
           std::isfinite(m.relative_return) && m.alpha && std::isfinite(*m.alpha) && m.beta && std::isfinite(*m.beta) &&
           std::isfinite(m.max_drawdown) && std::isfinite(m.sharpe);
}

void variants(Check& c) {
    const auto ticks = small_tape(3, 6);
    const auto runs = backtest::run_variants(ticks, small_config());
    const std::vector<std::string> tags{"G", "G+S", "G+V", "G+V+S"};
    c.expect(runs.size() == 4, "variant count");
    if (runs.size() != 4) return;
    std::ostringstream counts;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& rep = runs[i].report;
        c.expect(rep.variant == tags[i], "variant tag " + rep.variant);
        c.expect(rep.data_hash == runs[0].report.data_hash, "data hash differs");
        c.expect(finite_metrics(rep.metrics), "incomplete indicators for " + rep.variant);
        counts << rep.variant << "=" << rep.trade_count << " ";
        for (const auto& s : runs[i].engine.signals) {
            if (s.side == strategy::Side::Buy) c.expect(s.quote == strategy::Quote::Bid1, "buy not at bid1");
            if (s.side == strategy::Side::Sell) c.expect(s.quote == strategy::Quote::Ask1, "sell not at ask1");
        }
    }
    c.expect(runs[1].report.trade_count <= runs[0].report.trade_count, "G+S trades more than G");
    c.expect(runs[3].report.trade_count <= runs[2].report.trade_count, "G+V+S trades more than G+V");
    std::size_t adjusted = 0;
    for (const auto& s : runs[2].engine.signals) {
        if (s.delta1 == s.delta1_raw) continue;
        ++adjusted;
        c.expect(s.vpin && (*s.vpin > s.delta2 || *s.vpin < s.delta3), "delta1 adjusted inside the VPIN band");
    }
    for (std::size_t v : {0, 1})
        for (const auto& s : runs[v].engine.signals) c.expect(s.delta1 == s.delta1_raw, "delta1 adjusted without VPIN layer");
    c.note(counts.str() + "; G+V adjustments " + std::to_string(adjusted));
}

void no_look_ahead(Check& c) {
    const auto ticks = small_tape(4, 5);
    const auto cfg = small_config();
    const auto base = backtest::run_backtest(ticks, cfg);
    const auto& sig = base.engine.signals;
    c.expect(sig.size() > 100, "too few decision points");
    if (sig.size() <= 100) return;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> pick(0, sig.size() - 1);
    for (int k = 0; k < 20; ++k) {
        const std::size_t i = pick(rng);
        const auto t0 = sig[i].ts;
        std::vector<marketdata::Tick> v(ticks.ticks().begin(), ticks.ticks().end());
        std::normal_distribution<double> shock(0.0, 30.0);
        const double offset = shock(rng);
        for (auto& t : v) {
            if (t.ts < t0) continue;
            t.price += offset;
            if (t.bid1) *t.bid1 += offset;
            if (t.ask1) *t.ask1 += offset;
        }
        const marketdata::TickSeries shifted(std::move(v), ticks.instrument(), ticks.calendar());
        const auto alt = backtest::run_backtest(shifted, cfg);
        const std::string where = "decision " + std::to_string(i);
        if (alt.engine.signals.size() <= i) {
            c.expect(false, where + " missing after perturbation");
            continue;
        }
        const auto& a = alt.engine.signals[i];
        const auto& b = sig[i];
        c.expect(a.ts == b.ts && a.side == b.side && a.quote == b.quote && a.predicted == b.predicted &&
                     a.delta1 == b.delta1 && a.vpin == b.vpin && a.layer_trace == b.layer_trace,
                 where + " changed after perturbing the future");
    }
}

// 9 --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(Check& c) {
    const fs::path root = fs::absolute("acceptance_cli");
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "config.json";
    std::ofstream(config) << R"({"seed": 42,
  "synth": {"count": 14410, "spacing_ms": 5000, "omega": 2e-8, "alpha": 0.08, "beta": 0.9, "spread": 0.2},
  "strategy": {"svm_training_days": 2},
  "garch": {"window_days": 2},
  "svm": {"max_points": 400}})";
    const std::string cli = FLOWTOX_CLI_PATH;
    std::vector<std::map<std::string, std::string>> outputs;
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = root / ("run" + std::to_string(run));
        fs::create_directories(dir);
        const std::string common = " -c " + config.string() + " --output-dir " + dir.string();
        const std::string ticks = (dir / "ticks.csv").string();
        const std::vector<std::string> cmds{
            cli + common + " generate -o ticks.csv",
            cli + common + " vpin -i " + ticks + " -o vpin.csv --buckets buckets.csv",
            cli + common + " garch -i " + ticks + " -o garch.csv --forecast forecast.csv",
            cli + common + " backtest -i " + ticks + " --variants",
        };
        for (const auto& cmd : cmds) {
            const int rc = std::system((cmd + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
            c.expect(rc == 0, "command failed (" + std::to_string(rc) + "): " + cmd);
        }
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().filename() != "log.txt") files[e.path().filename().string()] = slurp(e.path());
        outputs.push_back(std::move(files));
    }
    c.expect(outputs[0].size() >= 8, "expected outputs missing (" + std::to_string(outputs[0].size()) + " files)");
    c.expect(outputs[0].size() == outputs[1].size(), "different file sets");
    for (const auto& [name, body] : outputs[0]) {
        const auto it = outputs[1].find(name);
        c.expect(it != outputs[1].end() && it->second == body, name + " differs between runs");
    }
    c.note(std::to_string(outputs[0].size()) + " files compared");
}

struct Criterion {
    int id;
    std::string title;
    std::function<void(Check&)> run;
    double limit_seconds;  ///< 0 for no runtime bound
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "VPIN bounds and volume conservation", vpin_bounds, 5.0},
        {2, "GARCH parameter recovery and gradient", garch_recovery, 60.0},
        {3, "ADF and Granger size/power", size_power, 120.0},
        {4, "Haar reconstruction, energy and denoising gain", wavelet, 0.0},
        {5, "SMO fixtures, KKT and dual monotonicity", smo, 0.0},
        {6, "Backtest accounting", accounting, 0.0},
        {7, "Layer-composition contracts", variants, 0.0},
        {8, "No look-ahead", no_look_ahead, 0.0},
        {9, "End-to-end CLI determinism", determinism, 0.0},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_seconds > 0.0) c.expect(secs < cr.limit_seconds, "runtime " + fmt(secs) + " s over " + fmt(cr.limit_seconds) + " s");
        failed += !c.ok();
        std::cout << (c.ok() ? "PASS" : "FAIL") << "  " << cr.id << ". " << cr.title << "  (" << std::fixed
                  << std::setprecision(2) << secs << " s)" << std::defaultfloat << "\n";
        for (const auto& n : c.notes()) std::cout << "        " << n << "\n";
        for (const auto& f : c.failures()) std::cout << "        ! " << f << "\n";
        std::cout.flush();
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
