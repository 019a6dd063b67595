#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flowtox/marketdata.hpp"
#include "flowtox/stats.hpp"

namespace flowtox::volatility {

enum class MeanModel { Zero, Constant, Ar1 };

[[nodiscard]] std::string to_string(MeanModel m);
/// Accepts "zero", "constant", "ar1".
[[nodiscard]] MeanModel parse_mean_model(const std::string& s);

struct GarchSpec {
    std::size_t p = 1;  ///< ARCH order (alphas)
    std::size_t q = 1;  ///< GARCH order (gammas)
    bool leverage = false;
    MeanModel mean = MeanModel::Constant;
};

/// Model parameters in their natural units.
///
///   r_t = m_t + e_t,  m_t = 0 | mu | c + phi*r_{t-1}
///   h_t = omega + sum_i alpha_i e_{t-i}^2 + leverage * e_{t-1}^2 [e_{t-1} < 0]
///               + sum_j gamma_j h_{t-j}
struct GarchParams {
    std::vector<double> mean;  ///< {} | {mu} | {c, phi}
    double omega = 0.0;
    std::vector<double> alphas;
    std::vector<double> gammas;
    double leverage = 0.0;

    /// sum(alphas) + sum(gammas) + leverage / 2
    [[nodiscard]] double persistence() const;
    /// Flat order: mean..., omega, alphas..., leverage (if enabled), gammas...
    [[nodiscard]] std::vector<double> pack(const GarchSpec& spec) const;
    [[nodiscard]] static GarchParams unpack(const GarchSpec& spec, std::span<const double> v);
    [[nodiscard]] static std::vector<std::string> names(const GarchSpec& spec);
};

/// Residuals and conditional variances implied by a parameter set.
struct GarchPath {
    std::vector<double> residuals;
    std::vector<double> cond_variance;
    double log_likelihood = 0.0;
    std::size_t first = 0;  ///< first observation entering the likelihood
};

/// Runs the variance recursion. Pre-sample variance is `presample_variance`
/// (the sample variance of r when negative) and pre-sample residuals are 0.
[[nodiscard]] GarchPath garch_filter(std::span<const double> r, const GarchSpec& spec,
                                     const GarchParams& params, double presample_variance = -1.0);

[[nodiscard]] double garch_log_likelihood(std::span<const double> r, const GarchSpec& spec,
                                          const GarchParams& params);

/// Gradient of the Gaussian log-likelihood in the packed parameter order.
[[nodiscard]] std::vector<double> garch_gradient(std::span<const double> r, const GarchSpec& spec,
                                                 const GarchParams& params);

struct GarchFit {
    GarchSpec spec;
    GarchParams params;
    std::vector<double> standard_errors;  ///< packed order; NaN when the Hessian is singular
    std::vector<double> residuals;
    std::vector<double> cond_variance;
    double log_likelihood = 0.0;
    double persistence = 0.0;
    double presample_variance = 0.0;
    double last_return = 0.0;  ///< r_T, needed by the AR(1) mean forecast
    std::size_t n_obs = 0;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
};

struct FitOptions {
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;  ///< log-likelihood improvement
    bool standard_errors = true;
};

/// Gaussian quasi-maximum likelihood. Throws DataError for short/constant
/// input and NumericalError when the optimizer does not converge.
[[nodiscard]] GarchFit fit_garch(std::span<const double> r, const GarchSpec& spec,
                                 const FitOptions& opts = {});
[[nodiscard]] GarchFit fit_tgarch(std::span<const double> r, const FitOptions& opts = {});

struct Forecast {
    std::vector<double> variance_path;
    std::vector<double> mean_path;
};

[[nodiscard]] Forecast forecast(const GarchFit& fit, std::size_t horizon);

/// One-step-ahead forecaster that folds in returns as they arrive, starting
/// from the same pre-sample state as garch_filter.
class GarchTracker {
public:
    explicit GarchTracker(const GarchFit& fit);

    void update(double r);
    [[nodiscard]] double next_mean() const;
    [[nodiscard]] double next_variance() const;

private:
    GarchSpec spec_;
    GarchParams params_;
    std::vector<double> eps_;  ///< most recent first
    std::vector<double> h_;    ///< most recent first
    double prev_return_ = 0.0;
    bool primed_ = false;
};

/// Simulates the model with standard normal innovations after `burn_in`
/// discarded steps.
[[nodiscard]] std::vector<double> simulate(const GarchSpec& spec, const GarchParams& params,
                                           std::size_t n, std::uint64_t seed,
                                           std::size_t burn_in = 1000);

/// Parameter table `parameter,estimate,std_error`.
void write_fit(std::ostream& out, const GarchFit& fit);

// ---------------------------------------------------------------------------
// Realized volatility and HAR-VPIN

/// Rolling sums of squared within-session close-to-close log returns over
/// `blocks` consecutive returns. Element k covers returns k..k+blocks-1.
[[nodiscard]] std::vector<double> realized_vol(const marketdata::BarSeries& bars, std::size_t blocks);
[[nodiscard]] std::vector<double> realized_vol(std::span<const double> returns, std::size_t blocks);

inline constexpr std::size_t kHourBlocks = 12;
inline constexpr std::size_t kDayBlocks = 48;

/// Aligned regressors; all vectors share one length.
struct HarVpinInputs {
    std::vector<double> rv_f;
    std::vector<double> rv_h;
    std::vector<double> rv_d;
    std::vector<double> volume;
    std::vector<double> vpin;
    std::vector<marketdata::Timestamp> ts;  ///< optional labels

    [[nodiscard]] std::size_t size() const { return rv_f.size(); }
};

struct HarVpinFit {
    double beta0 = 0.0;
    double beta_f = 0.0;
    double beta_h = 0.0;
    double beta_d = 0.0;
    double beta_v = 0.0;
    double beta_vpin = 0.0;
    std::size_t horizon = 1;
    stats::OlsFit diagnostics;
};

/// Regresses RV over the next `horizon` blocks (sum of rv_f[t+1..t+H]) on the
/// regressors at t plus an intercept.
[[nodiscard]] HarVpinFit fit_har_vpin(const HarVpinInputs& in, std::size_t horizon = 1);

/// Same regression against a caller-supplied target aligned with the inputs.
[[nodiscard]] HarVpinFit fit_har_vpin(const HarVpinInputs& in, std::span<const double> target,
                                      std::size_t horizon);

/// Builds aligned HAR inputs from 5-minute bars: rv_f is the bar's squared
/// return, rv_h/rv_d trailing 12/48-block sums, and vpin the latest value
/// whose bucket ended at or before the bar's end. Rows without a full daily
/// window or any VPIN value are dropped.
[[nodiscard]] HarVpinInputs har_inputs(const marketdata::BarSeries& bars,
                                       std::span<const marketdata::Timestamp> vpin_ts,
                                       std::span<const double> vpin);

}  // namespace flowtox::volatility
