#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "flowtox/error.hpp"
#include "flowtox/strategy.hpp"

namespace flowtox::strategy {
namespace {

// Piecewise-constant objective over the open intervals between consecutive
// distinct VPIN values (plus the two domain edges).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool first = false;  ///< touches 0
    bool last = false;   ///< touches 1
    std::size_t c2 = 0;
    std::size_t c3 = 0;
};

std::vector<Interval> sweep(std::span<const double> v_sorted, std::span<const std::size_t> order,
                            std::span<const char> hi_label, std::span<const char> lo_label) {
    const std::size_t m = v_sorted.size();
    std::size_t hi_total = 0;
    std::size_t lo_total = 0;
    for (std::size_t k = 0; k < m; ++k) {
        hi_total += hi_label[k] ? 1 : 0;
        lo_total += lo_label[k] ? 1 : 0;
    }
    std::vector<Interval> out;
    std::size_t hi_le = 0;
    std::size_t lo_le = 0;
    std::size_t n_le = 0;
    double lower = 0.0;
    bool first = true;
    std::size_t k = 0;
    const auto emit = [&](double upper, bool last) {
        if (!(lower < upper)) return;
        Interval iv;
        iv.lo = lower;
        iv.hi = upper;
        iv.first = first;
        iv.last = last;
        // Above the interval: predicted "high"; below: predicted "low".
        const std::size_t not_hi_gt = (m - n_le) - (hi_total - hi_le);
        iv.c2 = hi_le + not_hi_gt;
        const std::size_t not_lo_le = n_le - lo_le;
        iv.c3 = (lo_total - lo_le) + not_lo_le;
        out.push_back(iv);
    };
    while (k < m) {
        const double u = v_sorted[k];
        emit(u, false);
        while (k < m && v_sorted[k] == u) {
            hi_le += hi_label[order[k]] ? 1 : 0;
            lo_le += lo_label[order[k]] ? 1 : 0;
            ++n_le;
            ++k;
        }
        lower = u;
        first = false;
    }
    emit(1.0, true);
    if (!out.empty() && out.back().hi == 1.0) out.back().last = true;
    return out;
}

struct Pick {
    double value = 0.0;
    bool both_edges = false;
};

// Widest run of adjacent optimal intervals, lowest on ties.
template <typename Cost>
Pick pick_run(const std::vector<Interval>& iv, Cost cost) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& x : iv) best = std::min(best, cost(x));
    double best_w = -1.0;
    Pick pick;
    std::size_t i = 0;
    while (i < iv.size()) {
        if (cost(iv[i]) != best) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < iv.size() && cost(iv[j + 1]) == best) ++j;
        const double w = iv[j].hi - iv[i].lo;
        if (w > best_w) {
            best_w = w;
            const bool lo_edge = iv[i].first;
            const bool hi_edge = iv[j].last;
            pick.both_edges = lo_edge && hi_edge;
            pick.value = lo_edge ? 0.0 : hi_edge ? 1.0 : 0.5 * (iv[i].lo + iv[j].hi);
        }
        i = j + 1;
    }
    return pick;
}

struct Solution {
    double d2 = 0.0;
    double d3 = 0.0;
    std::size_t total = 0;
};

Solution solve(const std::vector<Interval>& iv, double fallback2, double fallback3) {
    Solution s;
    const Pick p2 = pick_run(iv, [](const Interval& x) { return x.c2; });
    const Pick p3 = pick_run(iv, [](const Interval& x) { return x.c3; });
    s.d2 = p2.both_edges ? fallback2 : p2.value;
    s.d3 = p3.both_edges ? fallback3 : p3.value;
    std::size_t best2 = std::numeric_limits<std::size_t>::max();
    std::size_t best3 = std::numeric_limits<std::size_t>::max();
    for (const auto& x : iv) {
        best2 = std::min(best2, x.c2);
        best3 = std::min(best3, x.c3);
    }
    s.total = best2 + best3;
    if (s.d3 <= s.d2) return s;

    // Separate optima cross: search pairs with the delta3 interval at or
    // below the delta2 interval.
    std::size_t best_total = std::numeric_limits<std::size_t>::max();
    std::size_t bi = 0;
    std::size_t bj = 0;
    std::size_t prefix_min = std::numeric_limits<std::size_t>::max();
    std::size_t prefix_arg = 0;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (iv[i].c3 < prefix_min) {
            prefix_min = iv[i].c3;
            prefix_arg = i;
        }
        const std::size_t t = iv[i].c2 + prefix_min;
        if (t < best_total) {
            best_total = t;
            bi = i;
            bj = prefix_arg;
        }
    }
    const auto mid = [](const Interval& x) { return x.first ? 0.0 : x.last ? 1.0 : 0.5 * (x.lo + x.hi); };
    s.d2 = mid(iv[bi]);
    s.d3 = bi == bj ? s.d2 : mid(iv[bj]);
    s.total = best_total;
    return s;
}

}  // namespace

std::string_view to_string(Side s) {
    switch (s) {
        case Side::Buy: return "buy";
        case Side::Sell: return "sell";
        case Side::None: return "none";
    }
    return "none";
}

std::string_view to_string(Quote q) {
    switch (q) {
        case Quote::Bid1: return "bid1";
        case Quote::Ask1: return "ask1";
        case Quote::None: return "none";
    }
    return "none";
}

int sign(Side s) { return s == Side::Buy ? 1 : s == Side::Sell ? -1 : 0; }

std::vector<double> Grid::points() const {
    if (!(step > 0.0) || !(lo < hi)) throw std::invalid_argument("grid: need lo < hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = lo + static_cast<double>(k) * step;
    return out;
}

std::string Layers::tag() const {
    std::string t = "G";
    if (vpin) t += "+V";
    if (svm) t += "+S";
    return t;
}

void StrategyConfig::validate() const {
    (void)delta1_grid.points();
    if (!(delta1_grid.lo > 0.0)) throw std::invalid_argument("strategy: delta1 grid must be positive");
    if (!(0.0 <= delta3 && delta3 <= delta2 && delta2 <= 1.0)) {
        throw std::invalid_argument("strategy: need 0 <= delta3 <= delta2 <= 1");
    }
    if (!(fluct_lo >= 0.0 && fluct_lo <= fluct_hi)) throw std::invalid_argument("strategy: need 0 <= fluct_lo <= fluct_hi");
    const auto fraction = [](double f, const char* what) {
        if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument(std::string("strategy: ") + what + " must be in (0, 1]");
    };
    fraction(position_fraction, "position_fraction");
    fraction(max_position_fraction, "max_position_fraction");
    fraction(high_vpin_factor, "high_vpin_factor");
    if (!(low_vpin_factor >= 1.0)) throw std::invalid_argument("strategy: low_vpin_factor must be >= 1");
    if (!(stop_loss_sigmas > 0.0)) throw std::invalid_argument("strategy: stop_loss_sigmas must be positive");
    if (!layers.garch) throw std::invalid_argument("strategy: the garch layer is always required");
    if (svm_training_days == 0) throw std::invalid_argument("strategy: svm_training_days must be >= 1");
    if (delta1_window < delta1_min_points || delta1_min_points == 0) {
        throw std::invalid_argument("strategy: delta1_window must be >= delta1_min_points >= 1");
    }
    if (basket_delay == 0) throw std::invalid_argument("strategy: basket_delay must be >= 1");
}

double predicted_value(double mean, double variance) {
    if (!std::isfinite(mean) || !(variance > 0.0) || !std::isfinite(variance)) {
        throw NumericalError("predicted_value: non-finite forecast");
    }
    return mean / std::sqrt(variance);
}

Signal garch_signal(double mean, double variance, double delta1) {
    Signal s;
    s.predicted = predicted_value(mean, variance);
    s.delta1 = delta1;
    if (s.predicted > delta1) {
        s.side = Side::Buy;
        s.quote = Quote::Bid1;
    } else if (s.predicted < -delta1) {
        s.side = Side::Sell;
        s.quote = Quote::Ask1;
    }
    s.layer_trace = "garch";
    return s;
}

std::vector<double> delta1_returns(std::span<const CalibrationPoint> window, const Grid& grid) {
    const auto pts = grid.points();
    std::vector<double> out(pts.size(), 0.0);
    for (std::size_t g = 0; g < pts.size(); ++g) {
        double total = 0.0;
        for (const auto& p : window) {
            if (p.predicted > pts[g]) total += p.buy_return;
            else if (p.predicted < -pts[g]) total += p.sell_return;
        }
        out[g] = total;
    }
    return out;
}

double calibrate_delta1(std::span<const CalibrationPoint> window, const Grid& grid,
                        std::size_t min_points) {
    if (window.size() < min_points) {
        throw DataError("calibrate_delta1: window has " + std::to_string(window.size()) +
                        " decision points, need " + std::to_string(min_points));
    }
    const auto pts = grid.points();
    const auto ret = delta1_returns(window, grid);
    std::size_t best = 0;
    for (std::size_t g = 1; g < ret.size(); ++g) {
        if (ret[g] > ret[best]) best = g;
    }
    return pts[best];
}

std::size_t threshold_misclassification(std::span<const double> vpin, std::span<const double> fluct,
                                        double delta2, double delta3, double fluct_hi,
                                        double fluct_lo) {
    if (vpin.size() != fluct.size()) throw std::invalid_argument("threshold_misclassification: length mismatch");
    std::size_t c = 0;
    for (std::size_t k = 0; k < vpin.size(); ++k) {
        c += ((vpin[k] > delta2) != (fluct[k] > fluct_hi)) ? 1 : 0;
        c += ((vpin[k] < delta3) != (fluct[k] < fluct_lo)) ? 1 : 0;
    }
    return c;
}

VpinThresholds calibrate_vpin_thresholds(std::span<const double> vpin,
                                         std::span<const double> future_fluct,
                                         const ThresholdSearch& search) {
    if (vpin.size() != future_fluct.size()) {
        throw DataError("calibrate_vpin_thresholds: VPIN and fluctuation series are not aligned");
    }
    if (vpin.empty()) throw DataError("calibrate_vpin_thresholds: empty VPIN series");
    const auto [mn, mx] = std::minmax_element(vpin.begin(), vpin.end());
    if (*mn == *mx) throw DataError("calibrate_vpin_thresholds: constant VPIN series");

    const std::size_t m = vpin.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vpin[a] < vpin[b]; });
    std::vector<double> v_sorted(m);
    for (std::size_t k = 0; k < m; ++k) v_sorted[k] = std::clamp(vpin[order[k]], 0.0, 1.0);

    const auto labels = [&](std::span<const double> fl, std::vector<char>& hi, std::vector<char>& lo) {
        hi.resize(m);
        lo.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            hi[k] = fl[k] > search.fluct_hi ? 1 : 0;
            lo[k] = fl[k] < search.fluct_lo ? 1 : 0;
        }
    };
    std::vector<char> hi;
    std::vector<char> lo;
    labels(future_fluct, hi, lo);

    const auto iv = sweep(v_sorted, order, hi, lo);
    const Solution sol = solve(iv, search.fallback_delta2, search.fallback_delta3);

    VpinThresholds out;
    const auto all_same = [](const std::vector<char>& x) {
        return std::all_of(x.begin(), x.end(), [&](char c) { return c == x.front(); });
    };
    out.degenerate = all_same(hi) || all_same(lo);
    out.delta2 = sol.d2;
    out.delta3 = sol.d3;

    if (!out.degenerate && search.permutations > 0) {
        // The fit must beat every relabelling of the same fluctuations.
        std::mt19937_64 rng(search.seed);
        std::vector<double> shuffled(future_fluct.begin(), future_fluct.end());
        std::vector<char> phi;
        std::vector<char> plo;
        bool flat = false;
        for (std::size_t p = 0; p < search.permutations; ++p) {
            for (std::size_t k = m - 1; k > 0; --k) {
                std::uniform_int_distribution<std::size_t> pick(0, k);
                std::swap(shuffled[k], shuffled[pick(rng)]);
            }
            labels(shuffled, phi, plo);
            const Solution ps = solve(sweep(v_sorted, order, phi, plo), search.fallback_delta2,
                                      search.fallback_delta3);
            if (ps.total <= sol.total) flat = true;
        }
        if (flat) {
            out.flat_objective = true;
            out.delta2 = search.fallback_delta2;
            out.delta3 = search.fallback_delta3;
        }
    }
    out.misclassified = threshold_misclassification(vpin, future_fluct, out.delta2, out.delta3,
                                                    search.fluct_hi, search.fluct_lo);
    return out;
}

std::vector<double> future_fluctuation(std::span<const double> end_prices, std::size_t delay) {
    if (delay == 0) throw std::invalid_argument("future_fluctuation: delay must be >= 1");
    std::vector<double> out;
    if (end_prices.size() <= delay) return out;
    out.reserve(end_prices.size() - delay);
    for (std::size_t k = 0; k + delay < end_prices.size(); ++k) {
        const double prev = end_prices[k + delay - 1];
        out.push_back(std::abs(end_prices[k + delay] / prev - 1.0));
    }
    return out;
}

double adjust_delta1(double delta1, double vpin_now, double delta2, double delta3,
                     double day_max_d1, double day_min_d1) {
    if (vpin_now > delta2) return 0.5 * (delta1 + day_max_d1);
    if (vpin_now < delta3) return 0.5 * (delta1 + day_min_d1);
    return delta1;
}

Signal svm_gate(int prediction, Signal proposed) {
    const bool veto = (proposed.side == Side::Buy && prediction < 0) ||
                      (proposed.side == Side::Sell && prediction > 0);
    if (veto) {
        proposed.side = Side::None;
        proposed.quote = Quote::None;
        proposed.layer_trace += proposed.layer_trace.empty() ? "svm-veto" : ";svm-veto";
    } else if (proposed.side != Side::None) {
        proposed.layer_trace += proposed.layer_trace.empty() ? "svm-pass" : ";svm-pass";
    }
    return proposed;
}

Signal svm_gate(const svm::SvmModel& model, std::span<const double> features, Signal proposed) {
    if (!model.trained()) throw std::logic_error("svm_gate: svm layer enabled with an untrained model");
    if (proposed.side == Side::None) return proposed;
    return svm_gate(model.predict(features), std::move(proposed));
}

double position_size(double available_funds, double vpin_now, double delta2, double delta3,
                     const SizingRule& rule) {
    if (!(available_funds > 0.0)) return 0.0;
    const double base = rule.base_fraction * available_funds;
    if (!rule.use_vpin) return base;
    if (vpin_now > delta2) return base * rule.high_vpin_factor;
    if (vpin_now < delta3) return std::min(base * rule.low_vpin_factor, rule.max_fraction * available_funds);
    return base;
}

bool stop_loss_check(double entry_price, double current_price, double sigma_price, double k,
                     Side side) {
    if (!(sigma_price > 0.0)) throw std::invalid_argument("stop_loss_check: sigma must be positive");
    double excursion = 0.0;
    if (side == Side::Buy) excursion = entry_price - current_price;
    else if (side == Side::Sell) excursion = current_price - entry_price;
    else return false;
    return excursion > k * sigma_price;
}

LiquidityPremium liquidity_premium(double mu, double gamma, double sigma2, double i, double n) {
    if (n < 1.0) throw std::invalid_argument("liquidity_premium: n must be >= 1");
    if (gamma < 0.0 || sigma2 < 0.0 || i < 0.0) {
        throw std::invalid_argument("liquidity_premium: gamma, sigma2 and i must be non-negative");
    }
    LiquidityPremium out;
    out.spread = gamma * sigma2 * i / (n + 1.0);
    out.s1 = mu - out.spread;
    return out;
}

}  // namespace flowtox::strategy
