#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "flowtox/stats.hpp"

namespace flowtox::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("chi2_sf: df must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double f_sf(double x, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_sf: df must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // P(F > x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2)
    return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

double chi2_isf(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi2_isf: p must be in (0, 1)");
    if (!(df > 0.0)) throw std::invalid_argument("chi2_isf: df must be positive");
    return 2.0 * boost::math::gamma_q_inv(df / 2.0, p);
}

}  // namespace flowtox::stats
