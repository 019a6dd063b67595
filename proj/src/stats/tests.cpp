#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flowtox/error.hpp"
#include "flowtox/simd/kernels.hpp"
#include "flowtox/stats.hpp"

namespace flowtox::stats {
namespace {

// Asymptotic constant-case critical values (1%, 5%, 10%) and the
// finite-sample response-surface terms in 1/T, 1/T^2, 1/T^3 (MacKinnon 2010).
constexpr std::array<double, 3> kAdfTauInf{-3.430328, -2.861415, -2.566744};
constexpr double kAdfSurface[3][3] = {
    {-6.5393, -16.786, -79.433},
    {-2.8903, -4.234, -40.040},
    {-1.5384, -2.809, 0.0},
};

// MacKinnon (1994) p-value response surface, constant case, one series.
constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[3] = {2.1659, 1.4412, 0.038269};
constexpr double kLargeP[4] = {1.7339, 0.93202, -0.12745, -0.010368};

double variance(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = simd::sum(x) / n;
    return simd::central_sums(x, mean).m2 / n;
}

struct AdfRegression {
    OlsFit fit;
    std::size_t n_obs = 0;
};

// Regression of dy_t on [1, y_{t-1}, dy_{t-1..t-p}] for t in [first, n-1],
// where dy_t = y_t - y_{t-1}. first must be >= p + 1.
AdfRegression adf_regression(std::span<const double> y, std::size_t p, std::size_t first) {
    const std::size_t n = y.size();
    const std::size_t rows = n - first;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + 2));
    std::vector<double> dy(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        const auto ri = static_cast<Eigen::Index>(r);
        dy[r] = y[t] - y[t - 1];
        X(ri, 0) = 1.0;
        X(ri, 1) = y[t - 1];
        for (std::size_t i = 1; i <= p; ++i) {
            X(ri, static_cast<Eigen::Index>(i + 1)) = y[t - i] - y[t - i - 1];
        }
    }
    return {ols(X, dy), rows};
}

}  // namespace

TestResult jarque_bera(std::span<const double> r) {
    if (r.size() < 8) throw DataError("jarque_bera needs at least 8 observations");
    const double n = static_cast<double>(r.size());
    const double mean = simd::sum(r) / n;
    const auto s = simd::central_sums(r, mean);
    const double m2 = s.m2 / n;
    if (!(m2 > 0.0)) throw DataError("jarque_bera: zero variance");
    const double skew = (s.m3 / n) / std::pow(m2, 1.5);
    const double kurt = (s.m4 / n) / (m2 * m2);
    TestResult out;
    out.name = "jarque_bera";
    out.statistic = n / 6.0 * (skew * skew + (kurt - 3.0) * (kurt - 3.0) / 4.0);
    out.p_value = chi2_sf(out.statistic, 2.0);
    out.df = {2.0};
    out.reject_at_5pct = out.p_value < 0.05;
    out.n_obs = r.size();
    return out;
}

std::array<double, 3> adf_critical_values(std::size_t n_obs) {
    if (n_obs == 0) throw std::invalid_argument("adf_critical_values: n_obs must be positive");
    const double inv = 1.0 / static_cast<double>(n_obs);
    std::array<double, 3> cv{};
    for (std::size_t i = 0; i < 3; ++i) {
        cv[i] = kAdfTauInf[i] +
                inv * (kAdfSurface[i][0] + inv * (kAdfSurface[i][1] + inv * kAdfSurface[i][2]));
    }
    return cv;
}

double adf_p_value(double statistic) {
    if (std::isnan(statistic)) return std::numeric_limits<double>::quiet_NaN();
    if (statistic > kTauMax) return 1.0;
    if (statistic < kTauMin) return 0.0;
    double z = 0.0;
    if (statistic <= kTauStar) {
        z = kSmallP[0] + statistic * (kSmallP[1] + statistic * kSmallP[2]);
    } else {
        z = kLargeP[0] + statistic * (kLargeP[1] + statistic * (kLargeP[2] + statistic * kLargeP[3]));
    }
    return std::clamp(normal_cdf(z), 0.0, 1.0);
}

TestResult adf_test(std::span<const double> series, std::size_t max_lag, LagSelection selection) {
    if (series.size() <= max_lag + 10) {
        throw DataError("adf_test: series length " + std::to_string(series.size()) +
                        " must exceed max_lag + 10");
    }
    if (!(variance(series) > 0.0)) throw DataError("adf_test: constant series");

    std::size_t lag = max_lag;
    if (selection == LagSelection::Sic) {
        // Compare all candidate orders on the common sample, then refit.
        double best_sic = std::numeric_limits<double>::infinity();
        const std::size_t first = max_lag + 1;
        for (std::size_t p = 0; p <= max_lag; ++p) {
            const auto reg = adf_regression(series, p, first);
            const double n = static_cast<double>(reg.n_obs);
            const double k = static_cast<double>(p + 2);
            const double sic =
                std::log(reg.fit.sum_squared_residuals / n) + k * std::log(n) / n;
            if (sic < best_sic - 1e-12) {
                best_sic = sic;
                lag = p;
            }
        }
    }

    const auto reg = adf_regression(series, lag, lag + 1);
    TestResult out;
    out.name = "adf";
    out.statistic = reg.fit.t_stats[1];
    out.p_value = adf_p_value(out.statistic);
    out.critical_values = adf_critical_values(reg.n_obs);
    out.reject_at_5pct = out.statistic < (*out.critical_values)[1];
    out.n_obs = reg.n_obs;
    out.lags = lag;
    return out;
}

double ljung_box_q(std::span<const double> x, std::size_t lags) {
    const std::size_t n = x.size();
    if (lags == 0 || lags >= n) throw std::invalid_argument("ljung_box_q: lags must be in [1, n)");
    const double mean = simd::sum(x) / static_cast<double>(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean;
    const double denom = simd::dot(d, d);
    if (!(denom > 0.0)) throw DataError("ljung_box_q: zero variance");
    const std::span<const double> ds(d);
    double q = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) {
        const double rho = simd::dot(ds.subspan(k), ds.first(n - k)) / denom;
        q += rho * rho / static_cast<double>(n - k);
    }
    const double nn = static_cast<double>(n);
    return nn * (nn + 2.0) * q;
}

TestResult arch_effect_test(std::span<const double> r, std::size_t lags) {
    if (lags == 0) throw std::invalid_argument("arch_effect_test: lags must be >= 1");
    if (r.size() <= lags + 10) {
        throw DataError("arch_effect_test: series length must exceed lags + 10");
    }
    const double mean = simd::sum(r) / static_cast<double>(r.size());
    std::vector<double> sq(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = (r[i] - mean) * (r[i] - mean);
    if (!(variance(r) > 0.0)) throw DataError("arch_effect_test: zero variance");
    TestResult out;
    out.name = "arch_effect";
    out.statistic = ljung_box_q(sq, lags);
    out.p_value = chi2_sf(out.statistic, static_cast<double>(lags));
    out.df = {static_cast<double>(lags)};
    out.reject_at_5pct = out.p_value < 0.05;
    out.n_obs = r.size();
    out.lags = lags;
    return out;
}

TestResult granger_direction(std::span<const double> cause, std::span<const double> effect,
                             std::size_t lag) {
    if (cause.size() != effect.size()) throw DataError("granger: series lengths differ");
    if (lag == 0) throw std::invalid_argument("granger: lag must be >= 1");
    const std::size_t n = effect.size();
    if (n <= 2 * lag + 10) throw DataError("granger: insufficient observations for the lag");

    const std::size_t rows = n - lag;
    const auto R = static_cast<Eigen::Index>(rows);
    const auto L = static_cast<Eigen::Index>(lag);
    Eigen::MatrixXd unrestricted(R, 1 + 2 * L);
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = lag + r;
        const auto ri = static_cast<Eigen::Index>(r);
        y[r] = effect[t];
        unrestricted(ri, 0) = 1.0;
        for (std::size_t i = 1; i <= lag; ++i) {
            unrestricted(ri, static_cast<Eigen::Index>(i)) = effect[t - i];
            unrestricted(ri, static_cast<Eigen::Index>(lag + i)) = cause[t - i];
        }
    }
    const Eigen::MatrixXd restricted = unrestricted.leftCols(1 + L);
    const OlsFit fu = ols(unrestricted, y);
    const OlsFit fr = ols(restricted, y);

    const double df1 = static_cast<double>(lag);
    const double df2 = static_cast<double>(rows - 2 * lag - 1);
    TestResult out;
    out.name = "granger";
    out.statistic = std::max(0.0, (fr.sum_squared_residuals - fu.sum_squared_residuals) / df1) /
                    (fu.sum_squared_residuals / df2);
    out.p_value = f_sf(out.statistic, df1, df2);
    out.df = {df1, df2};
    out.reject_at_5pct = out.p_value < 0.05;
    out.n_obs = rows;
    out.lags = lag;
    return out;
}

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, std::size_t lag) {
    if (x.size() != y.size()) throw DataError("granger: series lengths differ");
    return {granger_direction(x, y, lag), granger_direction(y, x, lag)};
}

}  // namespace flowtox::stats
