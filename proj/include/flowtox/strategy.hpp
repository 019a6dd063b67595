#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowtox/marketdata.hpp"
#include "flowtox/svm.hpp"

namespace flowtox::strategy {

using marketdata::Timestamp;

enum class Side { None, Buy, Sell };
enum class Quote { None, Bid1, Ask1 };

[[nodiscard]] std::string_view to_string(Side s);
[[nodiscard]] std::string_view to_string(Quote q);
[[nodiscard]] int sign(Side s);

struct Grid {
    double lo = 0.02;
    double hi = 2.0;
    double step = 0.02;

    /// lo, lo + step, ... up to hi (inclusive within half a step).
    [[nodiscard]] std::vector<double> points() const;
};

struct Layers {
    bool garch = true;
    bool vpin = true;
    bool svm = true;

    /// "G", "G+S", "G+V" or "G+V+S".
    [[nodiscard]] std::string tag() const;
};

struct StrategyConfig {
    Grid delta1_grid;
    double delta2 = 0.9;  ///< starting value and flat-objective fallback
    double delta3 = 0.1;
    double fluct_hi = 0.0015;
    double fluct_lo = 0.0005;
    std::size_t basket_delay = 2;
    double position_fraction = 0.10;
    double high_vpin_factor = 0.5;
    double low_vpin_factor = 1.5;
    double max_position_fraction = 0.20;
    double stop_loss_sigmas = 2.0;
    Layers layers;
    std::size_t svm_training_days = 30;
    std::size_t delta1_window = 60;       ///< decision points (bars) in the trailing hour
    std::size_t delta1_min_points = 30;
    std::size_t threshold_permutations = 19;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

struct Signal {
    Timestamp ts = 0;
    Side side = Side::None;
    Quote quote = Quote::None;
    double predicted = 0.0;  ///< standardized mean forecast
    double delta1 = 0.0;     ///< threshold actually applied
    std::string layer_trace;
};

/// mean / sqrt(variance).
[[nodiscard]] double predicted_value(double mean, double variance);

/// Buy at bid1 above +delta1, sell at ask1 below -delta1, otherwise none.
[[nodiscard]] Signal garch_signal(double mean, double variance, double delta1);

/// One historical decision point for threshold calibration: the predicted
/// value and the return a buy or a sell would have earned.
struct CalibrationPoint {
    double predicted = 0.0;
    double buy_return = 0.0;
    double sell_return = 0.0;
};

/// Window return at each grid point.
[[nodiscard]] std::vector<double> delta1_returns(std::span<const CalibrationPoint> window,
                                                 const Grid& grid);

/// Grid point maximizing the window return; ties go to the smallest value.
[[nodiscard]] double calibrate_delta1(std::span<const CalibrationPoint> window, const Grid& grid,
                                      std::size_t min_points = 30);

struct VpinThresholds {
    double delta2 = 0.9;
    double delta3 = 0.1;
    std::size_t misclassified = 0;
    bool flat_objective = false;  ///< no better than shuffled labels; fallback used
    bool degenerate = false;      ///< a rule's labels are all equal; boundary solution
};

struct ThresholdSearch {
    double fluct_hi = 0.0015;
    double fluct_lo = 0.0005;
    double fallback_delta2 = 0.9;
    double fallback_delta3 = 0.1;
    std::size_t permutations = 19;
    std::uint64_t seed = 1;
};

/// Misclassification count of the pair (delta2, delta3):
/// [vpin > d2] xor [fluct > hi]  +  [vpin < d3] xor [fluct < lo].
[[nodiscard]] std::size_t threshold_misclassification(std::span<const double> vpin,
                                                      std::span<const double> fluct, double delta2,
                                                      double delta3, double fluct_hi,
                                                      double fluct_lo);

/// Minimizes the misclassification count over 0 <= d3 <= d2 <= 1 with a
/// 0.01 grid refined on the exact breakpoints; each threshold is placed at
/// the middle of its optimal interval (or on the domain edge the interval
/// touches).
[[nodiscard]] VpinThresholds calibrate_vpin_thresholds(std::span<const double> vpin,
                                                       std::span<const double> future_fluct,
                                                       const ThresholdSearch& search = {});

/// |P[k+delay] / P[k+delay-1] - 1| for each bucket k with a known successor;
/// the result is shorter than `end_prices` by `delay`.
[[nodiscard]] std::vector<double> future_fluctuation(std::span<const double> end_prices,
                                                     std::size_t delay);

/// Mean with the day's max (VPIN above delta2) or min (VPIN below delta3).
[[nodiscard]] double adjust_delta1(double delta1, double vpin_now, double delta2, double delta3,
                                   double day_max_d1, double day_min_d1);

/// Vetoes a buy the model scores -1 and a sell it scores +1.
[[nodiscard]] Signal svm_gate(const svm::SvmModel& model, std::span<const double> features,
                              Signal proposed);
/// Same rule given an already computed prediction.
[[nodiscard]] Signal svm_gate(int prediction, Signal proposed);

struct SizingRule {
    double base_fraction = 0.10;
    double high_vpin_factor = 0.5;
    double low_vpin_factor = 1.5;
    double max_fraction = 0.20;
    bool use_vpin = true;
};

/// Currency to commit to a new position.
[[nodiscard]] double position_size(double available_funds, double vpin_now, double delta2,
                                   double delta3, const SizingRule& rule = {});

/// True when the adverse excursion exceeds k * sigma_price.
[[nodiscard]] bool stop_loss_check(double entry_price, double current_price, double sigma_price,
                                   double k, Side side);

struct LiquidityPremium {
    double s1 = 0.0;
    double spread = 0.0;
};

/// S1 = mu - gamma * sigma2 * i / (n + 1).
[[nodiscard]] LiquidityPremium liquidity_premium(double mu, double gamma, double sigma2, double i,
                                                 double n);

}  // namespace flowtox::strategy
