#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flowtox::stats {

// ---------------------------------------------------------------------------
// Distribution tails

[[nodiscard]] double normal_cdf(double x);
/// P(X > x) for X ~ chi-squared(df).
[[nodiscard]] double chi2_sf(double x, double df);
/// P(X > x) for X ~ F(d1, d2).
[[nodiscard]] double f_sf(double x, double d1, double d2);
/// Upper-tail quantile of chi-squared(df), i.e. x with chi2_sf(x) = p.
[[nodiscard]] double chi2_isf(double p, double df);

// ---------------------------------------------------------------------------
// Least squares

struct OlsFit {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> t_stats;
    std::vector<double> residuals;
    double r_squared = 0.0;
    double sum_squared_residuals = 0.0;
    double sigma2 = 0.0;  ///< SSR / (n - k)
    double log_likelihood = 0.0;
    std::size_t n_obs = 0;
    bool has_intercept = false;
};

/// Ordinary least squares of y on the columns of X. Throws NumericalError on
/// rank deficiency and DataError when n <= k.
[[nodiscard]] OlsFit ols(const Eigen::MatrixXd& X, std::span<const double> y);

// ---------------------------------------------------------------------------
// Tests

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    /// Degrees of freedom (chi-squared / F numerator, F denominator) where applicable.
    std::vector<double> df;
    /// 1%, 5%, 10% critical values where the test uses a table (ADF).
    std::optional<std::array<double, 3>> critical_values;
    bool reject_at_5pct = false;
    std::size_t n_obs = 0;
    /// Lag order actually used (ADF with automatic selection, Granger lag).
    std::size_t lags = 0;
};

/// JB = n/6 * (S^2 + (K-3)^2/4) with population moments; chi-squared(2) p-value.
[[nodiscard]] TestResult jarque_bera(std::span<const double> r);

enum class LagSelection { Fixed, Sic };

/// Constant-case Dickey-Fuller t-statistic on y_{t-1} in
///   dy_t = c + phi*y_{t-1} + sum_{i=1..p} g_i*dy_{t-i} + e_t.
[[nodiscard]] TestResult adf_test(std::span<const double> series, std::size_t max_lag,
                                  LagSelection selection = LagSelection::Fixed);

/// Constant-case ADF critical values (1%, 5%, 10%) for a regression with n_obs
/// effective observations.
[[nodiscard]] std::array<double, 3> adf_critical_values(std::size_t n_obs);

/// Approximate p-value of a constant-case ADF statistic.
[[nodiscard]] double adf_p_value(double statistic);

/// Ljung-Box Q on the squared demeaned series; chi-squared(lags) p-value.
[[nodiscard]] TestResult arch_effect_test(std::span<const double> r, std::size_t lags);

/// Ljung-Box Q statistic of a series at the given number of lags.
[[nodiscard]] double ljung_box_q(std::span<const double> x, std::size_t lags);

struct GrangerResult {
    TestResult x_causes_y;  ///< null: x does not Granger-cause y
    TestResult y_causes_x;  ///< null: y does not Granger-cause x
};

/// Bivariate Granger causality F-tests with the same lag on both variables.
[[nodiscard]] GrangerResult granger_test(std::span<const double> x, std::span<const double> y,
                                         std::size_t lag);

/// F-test of "cause" lags in the regression of "effect" on its own lags, the
/// cause lags and a constant.
[[nodiscard]] TestResult granger_direction(std::span<const double> cause,
                                           std::span<const double> effect, std::size_t lag);

}  // namespace flowtox::stats
