#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flowtox/csv.hpp"
#include "flowtox/error.hpp"

namespace flowtox::cli {

using nlohmann::json;

std::vector<Field> fields(RunConfig& c) {
    auto& s = c.strategy;
    auto& k = c.costs;
    return {
        {"seed", &c.seed, "seed for synthetic data and permutation tests"},
        {"data.calendar", &c.calendar, "session calendar: csi300 | all_day"},
        {"data.schema", &c.schema, "tick CSV schema: auto | basic | quotes"},
        {"data.instrument", &c.instrument, "instrument label"},
        {"synth.count", &c.synth.count, "ticks to generate"},
        {"synth.omega", &c.synth.omega, "GARCH omega of tick returns"},
        {"synth.alpha", &c.synth.alpha, "GARCH alpha"},
        {"synth.beta", &c.synth.beta, "GARCH beta"},
        {"synth.mean_return", &c.synth.mean_return, "mean tick log return"},
        {"synth.volume_log_mean", &c.synth.volume.log_mean, "mean of ln(volume)"},
        {"synth.volume_log_sigma", &c.synth.volume.log_sigma, "std of ln(volume)"},
        {"synth.initial_price", &c.synth.initial_price, "first price"},
        {"synth.spacing_ms", &c.synth_spacing_ms, "milliseconds between ticks"},
        {"synth.spread", &c.synth.spread, "bid/ask spread; 0 writes no quotes"},
        {"synth.start_day", &c.synth.start_day, "first local day (days since 1970-01-01)"},
        {"synth.instrument", &c.synth.instrument, "instrument label of generated data"},
        {"vpin.buckets_per_day", &c.vpin.buckets_per_day, "volume buckets per trading day"},
        {"vpin.window", &c.vpin.window, "buckets per VPIN value"},
        {"vpin.bucket_volume", &c.vpin.bucket_volume, "bucket volume; 0 derives it from daily volume"},
        {"garch.p", &c.garch_p, "ARCH order"},
        {"garch.q", &c.garch_q, "GARCH order"},
        {"garch.leverage", &c.garch_leverage, "add the threshold (leverage) term"},
        {"garch.mean", &c.garch_mean, "mean model: zero | constant | ar1"},
        {"garch.window_days", &c.garch_window_days, "trailing days of returns for the daily refit"},
        {"garch.interval_seconds", &c.garch_interval_seconds, "bar size for the garch command; 0 uses ticks"},
        {"svm.sigma", &c.svm_sigma, "RBF kernel width"},
        {"svm.c", &c.svm_c, "box constraint"},
        {"svm.tol", &c.svm_tol, "KKT tolerance"},
        {"svm.max_points", &c.svm_max_points, "most recent training rows kept per day"},
        {"svm.cache_mb", &c.svm_cache_mb, "kernel row cache size"},
        {"strategy.delta1_lo", &s.delta1_grid.lo, "delta1 grid start"},
        {"strategy.delta1_hi", &s.delta1_grid.hi, "delta1 grid end"},
        {"strategy.delta1_step", &s.delta1_grid.step, "delta1 grid step"},
        {"strategy.delta1_window", &s.delta1_window, "bars in the delta1 calibration window"},
        {"strategy.delta1_min_points", &s.delta1_min_points, "minimum points to calibrate delta1"},
        {"strategy.delta2", &s.delta2, "initial high-VPIN threshold and fallback"},
        {"strategy.delta3", &s.delta3, "initial low-VPIN threshold and fallback"},
        {"strategy.fluct_hi", &s.fluct_hi, "fluctuation labelled high above this"},
        {"strategy.fluct_lo", &s.fluct_lo, "fluctuation labelled low below this"},
        {"strategy.basket_delay", &s.basket_delay, "buckets ahead for the fluctuation label"},
        {"strategy.threshold_permutations", &s.threshold_permutations, "label shuffles in the flatness test"},
        {"strategy.position_fraction", &s.position_fraction, "share of cash committed per entry"},
        {"strategy.high_vpin_factor", &s.high_vpin_factor, "size multiplier when VPIN > delta2"},
        {"strategy.low_vpin_factor", &s.low_vpin_factor, "size multiplier when VPIN < delta3"},
        {"strategy.max_position_fraction", &s.max_position_fraction, "cap on the committed share"},
        {"strategy.stop_loss_sigmas", &s.stop_loss_sigmas, "stop distance in bar-price sigmas"},
        {"strategy.svm_training_days", &s.svm_training_days, "SVM window and warm-up, in days"},
        {"strategy.use_vpin", &s.layers.vpin, "enable the VPIN layer"},
        {"strategy.use_svm", &s.layers.svm, "enable the SVM layer"},
        {"backtest.capital", &k.capital, "initial cash"},
        {"backtest.margin_rate", &k.margin_rate, "margin as a share of notional"},
        {"backtest.fee_bps", &k.fee_bps, "fee per side in 1/10000 of notional"},
        {"backtest.multiplier", &k.multiplier, "contract multiplier"},
        {"backtest.tick_size", &k.tick_size, "price tick; half is charged without quotes"},
        {"backtest.maintenance_ratio", &k.maintenance_ratio, "margin call below margin * ratio"},
        {"backtest.strict_margin", &k.strict_margin, "fail the run on a margin call"},
        {"backtest.bar_seconds", &c.bar_seconds, "decision bar size"},
        {"backtest.trading_days_per_year", &c.trading_days_per_year, "annualization days"},
        {"denoise.level", &c.denoise_level, "decomposition depth"},
        {"denoise.mode", &c.denoise_mode, "threshold: estimated | unscaled"},
        {"diagnose.lags", &c.diagnose_lags, "lags for ADF, ARCH and Granger"},
        {"diagnose.selection", &c.diagnose_selection, "ADF lag choice: fixed | sic"},
        {"report.bar_seconds", &c.report_bar_seconds, "bar size for realized volatility"},
        {"report.horizon", &c.report_horizon, "HAR-VPIN forecast horizon in bars"},
        {"output.dir", &c.output_dir, "directory for output files"},
    };
}

namespace {

void set_field(const Field& f, const json& v) {
    const auto bad = [&](const char* want) {
        throw std::invalid_argument("config: " + f.key + " expects " + want + ", got " + v.dump());
    };
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) bad("a boolean");
                *p = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) bad("a string");
                *p = v.get<std::string>();
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) bad("a number");
                *p = v.get<double>();
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                if (!v.is_number_integer()) bad("an integer");
                *p = v.get<std::int64_t>();
            } else {
                if (!v.is_number_unsigned()) bad("a non-negative integer");
                *p = v.get<T>();
            }
        },
        f.ref);
}

json field_value(const Field& f) {
    return std::visit([](auto* p) { return json(*p); }, f.ref);
}

std::pair<std::string, std::string> split_key(const std::string& key) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) return {"", key};
    return {key.substr(0, dot), key.substr(dot + 1)};
}

}  // namespace

void apply_json(RunConfig& cfg, const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
    const auto fs = fields(cfg);
    std::set<std::string> sections;
    for (const auto& f : fs) sections.insert(split_key(f.key).first);
    for (const auto& [name, value] : doc.items()) {
        if (value.is_object()) {
            if (!sections.count(name) || name.empty()) throw std::invalid_argument("config: unknown section '" + name + "'");
            for (const auto& [key, v] : value.items()) {
                const std::string full = name + "." + key;
                const auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return f.key == full; });
                if (it == fs.end()) throw std::invalid_argument("config: unknown key '" + full + "'");
                set_field(*it, v);
            }
        } else {
            const auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return f.key == name; });
            if (it == fs.end()) throw std::invalid_argument("config: unknown key '" + name + "'");
            set_field(*it, value);
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    RunConfig cfg;
    apply_json(cfg, doc);
    return cfg;
}

nlohmann::ordered_json to_json(RunConfig& cfg) {
    nlohmann::ordered_json out;
    for (const auto& f : fields(cfg)) {
        const auto [section, key] = split_key(f.key);
        if (section.empty()) out[key] = field_value(f);
        else out[section][key] = field_value(f);
    }
    return out;
}

std::string describe_keys() {
    RunConfig defaults;
    std::ostringstream os;
    os << "Config keys (JSON sections; defaults shown):\n";
    for (const auto& f : fields(defaults)) {
        auto v = field_value(f);
        std::string text = v.is_number_float() ? csv::format_double(v.get<double>()) : v.dump();
        os << "  " << f.key << " = " << text << "\n      " << f.help << "\n";
    }
    return os.str();
}

marketdata::SessionCalendar RunConfig::session_calendar() const {
    if (calendar == "csi300") return marketdata::SessionCalendar::csi300();
    if (calendar == "all_day") return marketdata::SessionCalendar::all_day();
    throw std::invalid_argument("data.calendar must be csi300 or all_day, got '" + calendar + "'");
}

marketdata::TickCsvSchema RunConfig::tick_schema() const {
    if (schema == "auto") return marketdata::TickCsvSchema::Auto;
    if (schema == "basic") return marketdata::TickCsvSchema::Basic;
    if (schema == "quotes") return marketdata::TickCsvSchema::WithQuotes;
    throw std::invalid_argument("data.schema must be auto, basic or quotes, got '" + schema + "'");
}

volatility::GarchSpec RunConfig::garch_spec() const {
    volatility::GarchSpec spec;
    spec.p = garch_p;
    spec.q = garch_q;
    spec.leverage = garch_leverage;
    spec.mean = volatility::parse_mean_model(garch_mean);
    return spec;
}

marketdata::SynthSpec RunConfig::synth_spec() const {
    marketdata::SynthSpec s = synth;
    s.seed = seed;
    if (!(synth_spacing_ms > 0.0)) throw std::invalid_argument("synth.spacing_ms must be positive");
    s.spacing = static_cast<marketdata::Duration>(synth_spacing_ms * 1e6);
    return s;
}

backtest::BacktestConfig RunConfig::backtest_config() const {
    backtest::BacktestConfig b;
    b.strategy = strategy;
    b.strategy.seed = seed;
    b.costs = costs;
    b.garch = garch_spec();
    b.garch_window_days = garch_window_days;
    b.vpin = vpin;
    b.svm_sigma = svm_sigma;
    b.svm_c = svm_c;
    b.svm_tol = svm_tol;
    b.svm_max_points = svm_max_points;
    if (!(bar_seconds > 0.0)) throw std::invalid_argument("backtest.bar_seconds must be positive");
    b.bar_interval = static_cast<marketdata::Duration>(bar_seconds * 1e9);
    b.trading_days_per_year = trading_days_per_year;
    b.validate();
    return b;
}

denoise::ThresholdMode RunConfig::threshold_mode() const {
    if (denoise_mode == "estimated") return denoise::ThresholdMode::Estimated;
    if (denoise_mode == "unscaled") return denoise::ThresholdMode::Unscaled;
    throw std::invalid_argument("denoise.mode must be estimated or unscaled, got '" + denoise_mode + "'");
}

stats::LagSelection RunConfig::lag_selection() const {
    if (diagnose_selection == "fixed") return stats::LagSelection::Fixed;
    if (diagnose_selection == "sic") return stats::LagSelection::Sic;
    throw std::invalid_argument("diagnose.selection must be fixed or sic, got '" + diagnose_selection + "'");
}

}  // namespace flowtox::cli
