#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "flowtox/backtest.hpp"
#include "flowtox/csv.hpp"
#include "flowtox/denoise.hpp"
#include "flowtox/error.hpp"
#include "flowtox/marketdata.hpp"
#include "flowtox/stats.hpp"
#include "flowtox/svm.hpp"
#include "flowtox/volatility.hpp"
#include "flowtox/vpin.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace flowtox;
using cli::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

fs::path resolve(const RunConfig& cfg, const std::string& p) {
    const fs::path path(p);
    if (path.is_absolute() || cfg.output_dir.empty() || cfg.output_dir == ".") return path;
    return fs::path(cfg.output_dir) / path;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(17);
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw DataError("write failed for " + path.string());
}

marketdata::TickSeries read_input(const RunConfig& cfg, const std::string& path) {
    if (!fs::exists(path)) throw DataError("input file not found: " + path);
    return marketdata::load_ticks(path, cfg.tick_schema(), cfg.session_calendar(), cfg.instrument);
}

std::string file_tag(std::string tag) {
    for (char& c : tag) {
        if (c == '+') c = '_';
    }
    return tag;
}

void log_config(RunConfig& cfg) { std::cerr << "flowtox: config " << cli::to_json(cfg).dump() << "\n"; }

marketdata::Duration seconds(double s, const char* what) {
    if (!(s > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
    return static_cast<marketdata::Duration>(std::llround(s * 1e9));
}

// ---------------------------------------------------------------------------

void cmd_generate(RunConfig& cfg, const std::string& out_path) {
    const auto spec = cfg.synth_spec();
    const auto ticks = marketdata::synth_ticks(spec, cfg.session_calendar());
    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    marketdata::write_ticks(out, ticks);
    finish(out, path);
    std::cerr << "flowtox: wrote " << ticks.size() << " ticks to " << path.string() << "\n";
}

void write_test_row(csv::Writer& w, const stats::TestResult& t, const std::string& name) {
    w.field(name).field(t.statistic).field(t.p_value).field(t.lags).field(t.n_obs).field(t.reject_at_5pct ? 1 : 0);
    if (t.critical_values) {
        for (double c : *t.critical_values) w.field(c);
    } else {
        w.empty_field().empty_field().empty_field();
    }
    w.end_row();
}

void cmd_diagnose(RunConfig& cfg, const std::string& input, const std::string& other, const std::string& out_path) {
    const auto ticks = read_input(cfg, input);
    const auto r = marketdata::session_log_returns(ticks);
    std::vector<double> logp;
    logp.reserve(ticks.size());
    for (const auto& t : ticks.ticks()) logp.push_back(std::log(t.price));

    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    csv::Writer w(out);
    w.header({"test", "statistic", "p_value", "lags", "n_obs", "reject_5pct", "crit_1pct", "crit_5pct", "crit_10pct"});
    write_test_row(w, stats::adf_test(logp, cfg.diagnose_lags, cfg.lag_selection()), "adf_log_price");
    write_test_row(w, stats::adf_test(r.values, cfg.diagnose_lags, cfg.lag_selection()), "adf_returns");
    write_test_row(w, stats::jarque_bera(r.values), "jarque_bera");
    write_test_row(w, stats::arch_effect_test(r.values, cfg.diagnose_lags), "arch_effect");
    if (!other.empty()) {
        const auto ticks2 = read_input(cfg, other);
        const auto interval = seconds(cfg.bar_seconds, "backtest.bar_seconds");
        const auto a = marketdata::resample(ticks, interval);
        const auto b = marketdata::resample(ticks2, interval);
        // Returns of bars present in both series, within one session.
        std::vector<double> ra;
        std::vector<double> rb;
        std::size_t j = 0;
        const marketdata::Bar* pa = nullptr;
        const marketdata::Bar* pb = nullptr;
        for (const auto& bar : a.bars) {
            while (j < b.bars.size() && b.bars[j].ts < bar.ts) ++j;
            if (j == b.bars.size() || b.bars[j].ts != bar.ts) {
                pa = pb = nullptr;
                continue;
            }
            const auto& bb = b.bars[j];
            if (pa && pa->slot == bar.slot && pb->slot == bb.slot) {
                ra.push_back(std::log(bar.close / pa->close));
                rb.push_back(std::log(bb.close / pb->close));
            }
            pa = &bar;
            pb = &bb;
        }
        const auto g = stats::granger_test(rb, ra, cfg.diagnose_lags);
        write_test_row(w, g.x_causes_y, "granger_other_to_input");
        write_test_row(w, g.y_causes_x, "granger_input_to_other");
    }
    finish(out, path);
}

void cmd_vpin(RunConfig& cfg, const std::string& input, const std::string& out_path, const std::string& buckets_path) {
    const auto ticks = read_input(cfg, input);
    const auto run = vpin::run_vpin(ticks, cfg.vpin);
    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    vpin::write_vpin(out, run.series);
    finish(out, path);
    if (!buckets_path.empty()) {
        const auto bp = resolve(cfg, buckets_path);
        auto bo = open_out(bp);
        csv::Writer w(bo);
        w.header({"index", "start_ts", "end_ts", "buy_volume", "sell_volume", "total", "end_price", "complete"});
        for (const auto& b : run.buckets) {
            w.field(b.index).field(b.start_ts).field(b.end_ts).field(b.buy_volume).field(b.sell_volume)
                .field(b.total).field(b.end_price).field(b.complete ? 1 : 0).end_row();
        }
        finish(bo, bp);
    }
    std::cerr << "flowtox: " << run.series.size() << " VPIN values, bucket volume "
              << csv::format_double(run.series.bucket_volume) << ", sigma_dp " << csv::format_double(run.sigma_dp)
              << "\n";
}

void cmd_garch(RunConfig& cfg, const std::string& input, const std::string& out_path, std::size_t horizon,
               const std::string& forecast_path) {
    const auto ticks = read_input(cfg, input);
    const auto r = cfg.garch_interval_seconds > 0.0
                       ? marketdata::session_log_returns(
                             marketdata::resample(ticks, seconds(cfg.garch_interval_seconds, "garch.interval_seconds")))
                       : marketdata::session_log_returns(ticks);
    const auto fit = volatility::fit_garch(r.values, cfg.garch_spec());
    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    volatility::write_fit(out, fit);
    finish(out, path);
    if (!forecast_path.empty()) {
        const auto fc = volatility::forecast(fit, horizon);
        const auto fp = resolve(cfg, forecast_path);
        auto fo = open_out(fp);
        csv::Writer w(fo);
        w.header({"step", "mean", "variance"});
        for (std::size_t k = 0; k < horizon; ++k) {
            w.field(k + 1).field(fc.mean_path[k]).field(fc.variance_path[k]).end_row();
        }
        finish(fo, fp);
    }
    std::cerr << "flowtox: GARCH fit on " << fit.n_obs << " returns, log-likelihood "
              << csv::format_double(fit.log_likelihood) << ", persistence " << csv::format_double(fit.persistence)
              << "\n";
}

void cmd_svm_train(RunConfig& cfg, const std::string& input, const std::string& model_path,
                   const std::string& kernel_name, bool standardize) {
    std::ifstream in(input);
    if (!in) throw DataError("cannot open feature file " + input);
    std::string line;
    if (!std::getline(in, line)) throw DataError(input + ": empty file");
    const std::size_t cols = csv::split(line).size();
    if (cols < 2) throw DataError(input + ": need feature columns and a label column");
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto parts = csv::split(line);
        if (parts.size() != cols) {
            throw DataError(input + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields");
        }
        std::vector<double> x;
        for (std::size_t j = 0; j + 1 < cols; ++j) {
            const auto v = csv::parse_double(parts[j]);
            if (!v) throw DataError(input + ":" + std::to_string(lineno) + ": bad number '" + std::string(parts[j]) + "'");
            x.push_back(*v);
        }
        const auto y = csv::parse_int(parts.back());
        if (!y || (*y != 1 && *y != -1)) {
            throw DataError(input + ":" + std::to_string(lineno) + ": label must be -1 or 1");
        }
        rows.push_back(std::move(x));
        labels.push_back(static_cast<int>(*y));
    }
    if (rows.empty()) throw DataError(input + ": no training rows");
    auto X = svm::Matrix::from_rows(rows);
    svm::Standardizer scaler;
    if (standardize) {
        scaler = svm::Standardizer::fit(X);
        X = scaler.apply(X);
    }
    svm::Kernel kernel;
    if (kernel_name == "rbf") kernel = svm::Kernel::rbf(cfg.svm_sigma);
    else if (kernel_name == "linear") kernel = svm::Kernel::linear();
    else throw std::invalid_argument("--kernel must be rbf or linear");
    svm::SmoOptions opts;
    opts.C = cfg.svm_c;
    opts.tol = cfg.svm_tol;
    opts.cache_bytes = cfg.svm_cache_mb << 20;
    auto res = svm::train_smo(X, labels, kernel, opts);
    res.model.scaler = scaler;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (res.model.predict(rows[i]) == labels[i]) ++correct;
    }
    const auto path = resolve(cfg, model_path);
    auto out = open_out(path);
    svm::save_model(out, res.model);
    finish(out, path);
    std::cout << "rows," << rows.size() << "\nsupport_vectors," << res.model.support_vectors.rows << "\niterations,"
              << res.iterations << "\ntraining_accuracy,"
              << csv::format_double(static_cast<double>(correct) / static_cast<double>(rows.size())) << "\n";
}

void cmd_denoise(RunConfig& cfg, const std::string& input, const std::string& out_path,
                 const std::string& summary_path) {
    const auto ticks = read_input(cfg, input);
    const auto prices = ticks.prices();
    const auto res = denoise::denoise(prices, cfg.denoise_level, cfg.threshold_mode());
    if (res.level_capped)
        std::cerr << "warning: denoise level " << cfg.denoise_level << " capped at " << res.level << "\n";
    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    csv::Writer w(out);
    w.header({"ts", "price", "denoised"});
    for (std::size_t i = 0; i < ticks.size(); ++i) w.field(ticks[i].ts).field(prices[i]).field(res.signal[i]).end_row();
    finish(out, path);
    const auto sum = denoise::summarize(prices, res.signal);
    const auto sp = resolve(cfg, summary_path);
    auto so = open_out(sp);
    csv::Writer s(so);
    s.header({"level", "level_capped", "threshold", "variance_before", "variance_after", "mse"});
    s.field(res.level).field(res.level_capped ? 1 : 0).field(res.threshold).field(sum.variance_before)
        .field(sum.variance_after).field(sum.mse).end_row();
    finish(so, sp);
}

double days_since(marketdata::Timestamp ts, marketdata::Timestamp t0) {
    return static_cast<double>(ts - t0) / static_cast<double>(marketdata::kNanosPerDay);
}

nlohmann::ordered_json report_json(const backtest::BacktestReport& r) {
    nlohmann::ordered_json j;
    const auto& m = r.metrics;
    j["variant"] = r.variant;
    j["total_return"] = m.total_return;
    j["annualized_return"] = m.annualized_return;
    j["benchmark_return"] = m.benchmark_return;
    j["relative_return"] = m.relative_return;
    j["alpha"] = m.alpha ? nlohmann::ordered_json(*m.alpha) : nlohmann::ordered_json(nullptr);
    j["beta"] = m.beta ? nlohmann::ordered_json(*m.beta) : nlohmann::ordered_json(nullptr);
    j["max_drawdown"] = m.max_drawdown;
    j["sharpe"] = m.sharpe;
    j["trade_count"] = r.trade_count;
    j["fill_count"] = r.fill_count;
    j["margin_calls"] = r.margin_calls;
    j["fees_paid"] = r.fees_paid;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.data_hash));
    j["data_hash"] = hash;
    return j;
}

void cmd_backtest(RunConfig& cfg, const std::string& input, bool variants, const std::string& svg_path) {
    const auto ticks = read_input(cfg, input);
    const auto bcfg = cfg.backtest_config();
    std::vector<backtest::BacktestRun> runs;
    if (variants) runs = backtest::run_variants(ticks, bcfg);
    else runs.push_back(backtest::run_backtest(ticks, bcfg));

    std::vector<backtest::BacktestReport> reports;
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& run : runs) {
        reports.push_back(run.report);
        doc.push_back(report_json(run.report));
        const std::string tag = file_tag(run.report.variant);
        const auto tp = resolve(cfg, "trades_" + tag + ".csv");
        auto to = open_out(tp);
        backtest::write_trades(to, run.engine.fills);
        finish(to, tp);
        const auto ep = resolve(cfg, "equity_" + tag + ".csv");
        auto eo = open_out(ep);
        backtest::write_equity(eo, run.engine.equity);
        finish(eo, ep);
        const auto sp = resolve(cfg, "signals_" + tag + ".csv");
        auto so = open_out(sp);
        backtest::write_signals(so, run.engine.signals);
        finish(so, sp);
    }
    const auto rp = resolve(cfg, "report.csv");
    auto ro = open_out(rp);
    backtest::write_reports(ro, reports);
    finish(ro, rp);
    const auto jp = resolve(cfg, "report.json");
    auto jo = open_out(jp);
    jo << doc.dump(2) << "\n";
    finish(jo, jp);

    if (!svg_path.empty()) {
        cli::SvgPanel panel{"equity", {}};
        static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
        const auto t0 = runs.front().engine.equity.front().ts;
        cli::SvgSeries bench{"benchmark", {}, {}, "#7f7f7f"};
        for (const auto& p : runs.front().engine.benchmark) {
            bench.x.push_back(days_since(p.ts, t0));
            bench.y.push_back(p.equity);
        }
        panel.series.push_back(std::move(bench));
        for (std::size_t i = 0; i < runs.size(); ++i) {
            cli::SvgSeries s{runs[i].report.variant, {}, {}, colors[i % 4]};
            for (const auto& p : runs[i].engine.equity) {
                s.x.push_back(days_since(p.ts, t0));
                s.y.push_back(p.equity);
            }
            panel.series.push_back(std::move(s));
        }
        const auto path = resolve(cfg, svg_path);
        auto out = open_out(path);
        cli::write_svg_chart(out, "Equity vs buy-and-hold (days)", {panel});
        finish(out, path);
    }
    for (const auto& r : reports) {
        std::cerr << "flowtox: " << r.variant << " total " << csv::format_double(r.metrics.total_return)
                  << " trades " << r.trade_count << "\n";
    }
}

void cmd_report(RunConfig& cfg, const std::string& input, const std::string& out_path, const std::string& svg_path) {
    const auto ticks = read_input(cfg, input);
    const auto bars = marketdata::resample(ticks, seconds(cfg.report_bar_seconds, "report.bar_seconds"));
    const auto run = vpin::run_vpin(ticks, cfg.vpin);
    const auto in = volatility::har_inputs(bars, run.series.end_ts, run.series.values);
    const auto fit = volatility::fit_har_vpin(in, cfg.report_horizon);

    const auto path = resolve(cfg, out_path);
    auto out = open_out(path);
    csv::Writer w(out);
    w.header({"term", "coefficient", "std_error", "t_stat"});
    const char* names[] = {"intercept", "rv_f", "rv_h", "rv_d", "volume", "vpin"};
    const auto& d = fit.diagnostics;
    for (std::size_t k = 0; k < 6; ++k) {
        w.field(names[k]).field(d.coefficients[k]).field(d.standard_errors[k]).field(d.t_stats[k]).end_row();
    }
    w.field("r_squared").field(d.r_squared).empty_field().empty_field().end_row();
    w.field("n_obs").field(d.n_obs).empty_field().empty_field().end_row();
    w.field("horizon").field(fit.horizon).empty_field().empty_field().end_row();
    finish(out, path);

    if (!svg_path.empty()) {
        const auto t0 = ticks[0].ts;
        cli::SvgSeries price{"close", {}, {}, "#1f77b4"};
        for (const auto& b : bars.bars) {
            price.x.push_back(days_since(b.ts, t0));
            price.y.push_back(b.close);
        }
        cli::SvgSeries v{"vpin", {}, {}, "#d62728"};
        for (std::size_t i = 0; i < run.series.size(); ++i) {
            v.x.push_back(days_since(run.series.end_ts[i], t0));
            v.y.push_back(run.series.values[i]);
        }
        const auto sp = resolve(cfg, svg_path);
        auto so = open_out(sp);
        cli::write_svg_chart(so, "VPIN and price (days)", {{"price", {price}}, {"VPIN", {v}}});
        finish(so, sp);
    }
}

template <class T>
void override(std::optional<T>& opt, T& target) {
    if (opt) target = *opt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-flow toxicity, volatility and layered futures strategy toolkit"};
    app.footer(cli::describe_keys() +
               "\nExit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.\n"
               "FLOWTOX_CONFIG names a config file when --config is absent.");
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    app.add_option("-c,--config", config_path, "JSON config file")->envname("FLOWTOX_CONFIG");
    app.add_option("--set", sets, "override one key, e.g. --set strategy.delta2=0.8 (value parsed as JSON)");
    app.add_option("--seed", seed, "seed override");
    app.add_option("--output-dir", output_dir, "output directory override");

    // generate
    auto* gen = app.add_subcommand("generate", "write synthetic GARCH ticks as CSV");
    std::string gen_out = "ticks.csv";
    std::optional<std::size_t> g_count;
    std::optional<double> g_omega, g_alpha, g_beta, g_mean, g_spread, g_spacing;
    gen->add_option("-o,--out", gen_out, "output CSV")->capture_default_str();
    gen->add_option("--count", g_count, "ticks");
    gen->add_option("--omega", g_omega, "GARCH omega");
    gen->add_option("--alpha", g_alpha, "GARCH alpha");
    gen->add_option("--beta", g_beta, "GARCH beta");
    gen->add_option("--mean-return", g_mean, "mean log return");
    gen->add_option("--spread", g_spread, "quoted spread; 0 for no quotes");
    gen->add_option("--spacing-ms", g_spacing, "milliseconds between ticks");

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "ADF, Jarque-Bera, ARCH-effect and optional Granger tests");
    std::string d_in, d_other, d_out = "diagnose.csv";
    std::optional<std::size_t> d_lags;
    diag->add_option("-i,--input", d_in, "tick CSV")->required();
    diag->add_option("--other", d_other, "second tick CSV for Granger tests");
    diag->add_option("--lags", d_lags, "lag order");
    diag->add_option("-o,--out", d_out, "report CSV")->capture_default_str();

    // vpin
    auto* vp = app.add_subcommand("vpin", "bucket the tape and compute VPIN");
    std::string v_in, v_out = "vpin.csv", v_buckets;
    std::optional<std::size_t> v_bpd, v_window;
    std::optional<double> v_volume;
    vp->add_option("-i,--input", v_in, "tick CSV")->required();
    vp->add_option("-o,--out", v_out, "VPIN CSV")->capture_default_str();
    vp->add_option("--buckets", v_buckets, "bucket CSV");
    vp->add_option("--buckets-per-day", v_bpd, "buckets per day");
    vp->add_option("--window", v_window, "VPIN window in buckets");
    vp->add_option("--bucket-volume", v_volume, "bucket volume");

    // garch
    auto* ga = app.add_subcommand("garch", "fit a GARCH(p,q) or threshold GARCH by QMLE");
    std::string ga_in, ga_out = "garch_fit.csv", ga_fc_out;
    std::optional<std::size_t> ga_p, ga_q;
    std::optional<bool> ga_lev;
    std::optional<std::string> ga_mean;
    std::optional<double> ga_interval;
    std::size_t ga_horizon = 10;
    ga->add_option("-i,--input", ga_in, "tick CSV")->required();
    ga->add_option("-o,--out", ga_out, "parameter CSV")->capture_default_str();
    ga->add_option("--p", ga_p, "ARCH order");
    ga->add_option("--q", ga_q, "GARCH order");
    ga->add_option("--leverage", ga_lev, "threshold term (true/false)");
    ga->add_option("--mean", ga_mean, "zero | constant | ar1");
    ga->add_option("--interval-seconds", ga_interval, "fit bar returns instead of tick returns");
    ga->add_option("--forecast", ga_fc_out, "forecast CSV");
    ga->add_option("--horizon", ga_horizon, "forecast steps")->capture_default_str();

    // svm-train
    auto* st = app.add_subcommand("svm-train", "train a C-SVM by SMO on a feature CSV (last column: label)");
    std::string s_in, s_model = "svm_model.txt", s_kernel = "rbf";
    bool s_standardize = true;
    std::optional<double> s_sigma, s_c, s_tol;
    st->add_option("-i,--input", s_in, "feature CSV with header")->required();
    st->add_option("-m,--model", s_model, "model file")->capture_default_str();
    st->add_option("--kernel", s_kernel, "rbf | linear")->capture_default_str();
    st->add_option("--standardize", s_standardize, "z-score features")->capture_default_str();
    st->add_option("--sigma", s_sigma, "RBF width");
    st->add_option("--c", s_c, "box constraint");
    st->add_option("--tol", s_tol, "KKT tolerance");

    // denoise
    auto* dn = app.add_subcommand("denoise", "Haar wavelet soft-threshold denoising of tick prices");
    std::string dn_in, dn_out = "denoised.csv", dn_summary = "denoise_summary.csv";
    std::optional<std::size_t> dn_level;
    std::optional<std::string> dn_mode;
    dn->add_option("-i,--input", dn_in, "tick CSV")->required();
    dn->add_option("-o,--out", dn_out, "denoised CSV")->capture_default_str();
    dn->add_option("--summary", dn_summary, "summary CSV")->capture_default_str();
    dn->add_option("--level", dn_level, "decomposition depth");
    dn->add_option("--mode", dn_mode, "estimated | unscaled");

    // backtest
    auto* bt = app.add_subcommand("backtest", "replay the layered strategy");
    std::string b_in, b_svg;
    bool b_variants = false;
    bt->add_option("-i,--input", b_in, "tick CSV")->required();
    bt->add_flag("--variants", b_variants, "run G, G+S, G+V and G+V+S");
    bt->add_option("--svg", b_svg, "equity chart");

    // report
    auto* rp = app.add_subcommand("report", "HAR-VPIN regression and VPIN/price chart");
    std::string r_in, r_out = "har_vpin.csv", r_svg;
    std::optional<std::size_t> r_horizon;
    rp->add_option("-i,--input", r_in, "tick CSV")->required();
    rp->add_option("-o,--out", r_out, "coefficient CSV")->capture_default_str();
    rp->add_option("--svg", r_svg, "VPIN and price chart");
    rp->add_option("--horizon", r_horizon, "forecast horizon in bars");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : cli::load_config(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
            const std::string key = s.substr(0, eq);
            nlohmann::json value;
            try {
                value = nlohmann::json::parse(s.substr(eq + 1));
            } catch (const nlohmann::json::parse_error&) {
                value = s.substr(eq + 1);
            }
            nlohmann::json doc;
            const auto dot = key.find('.');
            if (dot == std::string::npos) doc[key] = value;
            else doc[key.substr(0, dot)][key.substr(dot + 1)] = value;
            cli::apply_json(cfg, doc);
        }
        override(seed, cfg.seed);
        override(output_dir, cfg.output_dir);

        if (*gen) {
            override(g_count, cfg.synth.count);
            override(g_omega, cfg.synth.omega);
            override(g_alpha, cfg.synth.alpha);
            override(g_beta, cfg.synth.beta);
            override(g_mean, cfg.synth.mean_return);
            override(g_spread, cfg.synth.spread);
            override(g_spacing, cfg.synth_spacing_ms);
            log_config(cfg);
            cmd_generate(cfg, gen_out);
        } else if (*diag) {
            override(d_lags, cfg.diagnose_lags);
            log_config(cfg);
            cmd_diagnose(cfg, d_in, d_other, d_out);
        } else if (*vp) {
            override(v_bpd, cfg.vpin.buckets_per_day);
            override(v_window, cfg.vpin.window);
            override(v_volume, cfg.vpin.bucket_volume);
            log_config(cfg);
            cmd_vpin(cfg, v_in, v_out, v_buckets);
        } else if (*ga) {
            override(ga_p, cfg.garch_p);
            override(ga_q, cfg.garch_q);
            override(ga_lev, cfg.garch_leverage);
            override(ga_mean, cfg.garch_mean);
            override(ga_interval, cfg.garch_interval_seconds);
            log_config(cfg);
            cmd_garch(cfg, ga_in, ga_out, ga_horizon, ga_fc_out);
        } else if (*st) {
            override(s_sigma, cfg.svm_sigma);
            override(s_c, cfg.svm_c);
            override(s_tol, cfg.svm_tol);
            log_config(cfg);
            cmd_svm_train(cfg, s_in, s_model, s_kernel, s_standardize);
        } else if (*dn) {
            override(dn_level, cfg.denoise_level);
            override(dn_mode, cfg.denoise_mode);
            log_config(cfg);
            cmd_denoise(cfg, dn_in, dn_out, dn_summary);
        } else if (*bt) {
            log_config(cfg);
            cmd_backtest(cfg, b_in, b_variants, b_svg);
        } else if (*rp) {
            override(r_horizon, cfg.report_horizon);
            log_config(cfg);
            cmd_report(cfg, r_in, r_out, r_svg);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "flowtox: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "flowtox: data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "flowtox: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "flowtox: error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
