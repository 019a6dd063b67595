#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "flowtox/error.hpp"
#include "flowtox/volatility.hpp"

namespace flowtox::volatility {
namespace {

// Squared close-to-close returns of consecutive bars in the same session,
// each paired with the later bar's index.
struct SquaredReturns {
    std::vector<double> r2;
    std::vector<std::size_t> bar;
};

SquaredReturns squared_returns(const marketdata::BarSeries& bars) {
    SquaredReturns out;
    for (std::size_t i = 1; i < bars.size(); ++i) {
        const auto& a = bars.bars[i - 1];
        const auto& b = bars.bars[i];
        if (a.slot != b.slot) continue;
        const double r = std::log(b.close / a.close);
        out.r2.push_back(r * r);
        out.bar.push_back(i);
    }
    return out;
}

}  // namespace

std::vector<double> realized_vol(std::span<const double> returns, std::size_t blocks) {
    if (blocks == 0) throw std::invalid_argument("realized_vol: blocks must be >= 1");
    if (returns.size() < blocks) {
        throw DataError("realized_vol: " + std::to_string(returns.size()) +
                        " returns, window needs " + std::to_string(blocks));
    }
    std::vector<double> out(returns.size() - blocks + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double s = 0.0;
        for (std::size_t j = k; j < k + blocks; ++j) s += returns[j] * returns[j];
        out[k] = s;
    }
    return out;
}

std::vector<double> realized_vol(const marketdata::BarSeries& bars, std::size_t blocks) {
    return realized_vol(marketdata::session_log_returns(bars).values, blocks);
}

HarVpinFit fit_har_vpin(const HarVpinInputs& in, std::span<const double> target,
                        std::size_t horizon) {
    const std::size_t n = in.size();
    if (in.rv_h.size() != n || in.rv_d.size() != n || in.volume.size() != n ||
        in.vpin.size() != n || target.size() != n) {
        throw DataError("fit_har_vpin: regressor series are not aligned");
    }
    if (n < 100) throw DataError("fit_har_vpin: need at least 100 aligned rows, got " + std::to_string(n));
    if (horizon == 0) throw std::invalid_argument("fit_har_vpin: horizon must be >= 1");

    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd X(N, 6);
    for (Eigen::Index t = 0; t < N; ++t) {
        const auto i = static_cast<std::size_t>(t);
        X(t, 0) = 1.0;
        X(t, 1) = in.rv_f[i];
        X(t, 2) = in.rv_h[i];
        X(t, 3) = in.rv_d[i];
        X(t, 4) = in.volume[i];
        X(t, 5) = in.vpin[i];
    }
    HarVpinFit fit;
    fit.diagnostics = stats::ols(X, target);
    const auto& b = fit.diagnostics.coefficients;
    fit.beta0 = b[0];
    fit.beta_f = b[1];
    fit.beta_h = b[2];
    fit.beta_d = b[3];
    fit.beta_v = b[4];
    fit.beta_vpin = b[5];
    fit.horizon = horizon;
    return fit;
}

HarVpinFit fit_har_vpin(const HarVpinInputs& in, std::size_t horizon) {
    const std::size_t n = in.size();
    if (horizon == 0) throw std::invalid_argument("fit_har_vpin: horizon must be >= 1");
    if (n <= horizon) throw DataError("fit_har_vpin: series shorter than the horizon");
    const std::size_t rows = n - horizon;
    HarVpinInputs cut;
    std::vector<double> target(rows);
    for (std::size_t t = 0; t < rows; ++t) {
        double s = 0.0;
        for (std::size_t k = 1; k <= horizon; ++k) s += in.rv_f[t + k];
        target[t] = s;
    }
    const auto head = [rows](const std::vector<double>& v) {
        return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(rows, v.size())));
    };
    cut.rv_f = head(in.rv_f);
    cut.rv_h = head(in.rv_h);
    cut.rv_d = head(in.rv_d);
    cut.volume = head(in.volume);
    cut.vpin = head(in.vpin);
    return fit_har_vpin(cut, target, horizon);
}

HarVpinInputs har_inputs(const marketdata::BarSeries& bars,
                         std::span<const marketdata::Timestamp> vpin_ts,
                         std::span<const double> vpin) {
    if (vpin_ts.size() != vpin.size()) throw DataError("har_inputs: VPIN timestamps and values differ in length");
    const auto sq = squared_returns(bars);
    HarVpinInputs out;
    std::size_t vi = 0;
    double hour = 0.0;
    double day = 0.0;
    for (std::size_t k = 0; k < sq.r2.size(); ++k) {
        hour += sq.r2[k];
        day += sq.r2[k];
        if (k >= kHourBlocks) hour -= sq.r2[k - kHourBlocks];
        if (k >= kDayBlocks) day -= sq.r2[k - kDayBlocks];
        const auto& bar = bars.bars[sq.bar[k]];
        const marketdata::Timestamp bar_end = bar.ts + bars.interval;
        while (vi < vpin_ts.size() && vpin_ts[vi] <= bar_end) ++vi;
        if (k + 1 < kDayBlocks || vi == 0) continue;
        out.rv_f.push_back(sq.r2[k]);
        out.rv_h.push_back(std::max(hour, 0.0));
        out.rv_d.push_back(std::max(day, 0.0));
        out.volume.push_back(static_cast<double>(bar.volume));
        out.vpin.push_back(vpin[vi - 1]);
        out.ts.push_back(bar.ts);
    }
    return out;
}

}  // namespace flowtox::volatility
