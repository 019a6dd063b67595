#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flowtox/backtest.hpp"
#include "flowtox/denoise.hpp"
#include "flowtox/marketdata.hpp"
#include "flowtox/stats.hpp"

namespace flowtox::cli {

struct RunConfig {
    std::uint64_t seed = 1;

    std::string calendar = "csi300";  ///< csi300 | all_day
    std::string schema = "auto";      ///< auto | basic | quotes
    std::string instrument;

    marketdata::SynthSpec synth;
    double synth_spacing_ms = 500.0;

    vpin::VpinConfig vpin;

    std::size_t garch_p = 1;
    std::size_t garch_q = 1;
    bool garch_leverage = false;
    std::string garch_mean = "constant";
    std::size_t garch_window_days = 5;
    double garch_interval_seconds = 0.0;  ///< 0 fits tick returns

    double svm_sigma = 1e-4;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    std::size_t svm_max_points = 2000;
    std::size_t svm_cache_mb = 64;

    strategy::StrategyConfig strategy;

    backtest::Costs costs;
    double bar_seconds = 60.0;
    std::size_t trading_days_per_year = 252;

    std::size_t denoise_level = 6;
    std::string denoise_mode = "estimated";

    std::size_t diagnose_lags = 12;
    std::string diagnose_selection = "sic";

    double report_bar_seconds = 300.0;
    std::size_t report_horizon = 1;

    std::string output_dir = ".";

    [[nodiscard]] marketdata::SessionCalendar session_calendar() const;
    [[nodiscard]] marketdata::TickCsvSchema tick_schema() const;
    [[nodiscard]] volatility::GarchSpec garch_spec() const;
    [[nodiscard]] backtest::BacktestConfig backtest_config() const;
    [[nodiscard]] marketdata::SynthSpec synth_spec() const;
    [[nodiscard]] denoise::ThresholdMode threshold_mode() const;
    [[nodiscard]] stats::LagSelection lag_selection() const;
};

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "config fields assume a 64-bit size_t");
using FieldRef = std::variant<double*, std::size_t*, std::int64_t*, bool*, std::string*>;

struct Field {
    std::string key;  ///< "section.name" or "seed"
    FieldRef ref;
    std::string help;
};

/// Every configurable key, bound to `cfg`.
[[nodiscard]] std::vector<Field> fields(RunConfig& cfg);

/// Applies a JSON document; unknown sections or keys and wrong types throw
/// std::invalid_argument.
void apply_json(RunConfig& cfg, const nlohmann::json& doc);

[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Nested JSON of every key in a fixed order.
[[nodiscard]] nlohmann::ordered_json to_json(RunConfig& cfg);

/// "key = default  help" lines for --help.
[[nodiscard]] std::string describe_keys();

}  // namespace flowtox::cli
