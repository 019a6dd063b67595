#include <cmath>
#include <numbers>
#include <string>

#include "flowtox/error.hpp"
#include "flowtox/stats.hpp"

namespace flowtox::stats {

OlsFit ols(const Eigen::MatrixXd& X, std::span<const double> y) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index k = X.cols();
    if (X.rows() != n) throw std::invalid_argument("ols: design matrix rows != response length");
    if (k == 0) throw std::invalid_argument("ols: design matrix has no columns");
    if (n <= k) {
        throw DataError("ols: need more observations (" + std::to_string(n) +
                        ") than regressors (" + std::to_string(k) + ")");
    }

    // Column scaling keeps the rank test meaningful when regressors live on
    // very different scales (realized variance vs. volume).
    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double norm = X.col(j).norm();
        scale(j) = norm > 0.0 ? norm : 1.0;
        if (norm == 0.0 || !std::isfinite(norm)) {
            throw NumericalError("ols: regressor column " + std::to_string(j) +
                                 " is identically zero or non-finite");
        }
    }
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        throw NumericalError("ols: design matrix is rank deficient (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(k) + ")");
    }
    const Eigen::VectorXd beta_s = qr.solve(yv);
    const Eigen::VectorXd beta = beta_s.cwiseQuotient(scale);
    const Eigen::VectorXd resid = yv - X * beta;

    OlsFit fit;
    fit.n_obs = static_cast<std::size_t>(n);
    fit.coefficients.assign(beta.data(), beta.data() + k);
    fit.residuals.assign(resid.data(), resid.data() + n);
    fit.sum_squared_residuals = resid.squaredNorm();
    fit.sigma2 = fit.sum_squared_residuals / static_cast<double>(n - k);

    // (X'X)^{-1} = P R^{-1} R^{-T} P^T in the scaled basis.
    const Eigen::MatrixXd R =
        qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd cov_s = perm * cov_perm * perm.transpose();

    fit.standard_errors.resize(static_cast<std::size_t>(k));
    fit.t_stats.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        const double se = std::sqrt(fit.sigma2 * cov_s(j, j)) / scale(j);
        fit.standard_errors[static_cast<std::size_t>(j)] = se;
        fit.t_stats[static_cast<std::size_t>(j)] = se > 0.0 ? beta(j) / se : 0.0;
    }

    for (Eigen::Index j = 0; j < k && !fit.has_intercept; ++j) {
        const double first = X(0, j);
        fit.has_intercept = first != 0.0 && (X.col(j).array() == first).all();
    }
    const double mean_y = yv.mean();
    const double tss = (yv.array() - mean_y).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.sum_squared_residuals / tss : 0.0;

    const double nn = static_cast<double>(n);
    fit.log_likelihood = -0.5 * nn *
                         (1.0 + std::log(2.0 * std::numbers::pi) +
                          std::log(fit.sum_squared_residuals / nn));
    return fit;
}

}  // namespace flowtox::stats
