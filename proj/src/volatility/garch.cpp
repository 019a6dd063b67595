#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "flowtox/csv.hpp"
#include "flowtox/error.hpp"
#include "flowtox/simd/kernels.hpp"
#include "flowtox/volatility.hpp"

namespace flowtox::volatility {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::size_t mean_count(MeanModel m) {
    switch (m) {
        case MeanModel::Zero: return 0;
        case MeanModel::Constant: return 1;
        case MeanModel::Ar1: return 2;
    }
    return 0;
}

std::size_t first_obs(const GarchSpec& spec) { return spec.mean == MeanModel::Ar1 ? 1 : 0; }

void validate(const GarchSpec& spec) {
    if (spec.p + spec.q == 0) throw std::invalid_argument("garch: p + q must be >= 1");
    if (spec.leverage && spec.p == 0) throw std::invalid_argument("garch: leverage needs p >= 1");
}

void validate(const GarchSpec& spec, const GarchParams& prm) {
    validate(spec);
    if (prm.mean.size() != mean_count(spec.mean) || prm.alphas.size() != spec.p ||
        prm.gammas.size() != spec.q) {
        throw std::invalid_argument("garch: parameter shape does not match spec");
    }
}

double sample_variance(std::span<const double> r) {
    const double n = static_cast<double>(r.size());
    const double mean = simd::sum(r) / n;
    return simd::central_sums(r, mean).m2 / n;
}

// Packed index layout.
struct Layout {
    std::size_t nm, iw, ia, il, ig, size;
    explicit Layout(const GarchSpec& s)
        : nm(mean_count(s.mean)),
          iw(nm),
          ia(nm + 1),
          il(ia + s.p),
          ig(ia + s.p + (s.leverage ? 1 : 0)),
          size(ig + s.q) {}
};

// Filter plus optional gradient in packed natural order.
double evaluate(std::span<const double> r, const GarchSpec& spec, const GarchParams& prm,
                double s2, std::vector<double>* grad, GarchPath* path) {
    const std::size_t n = r.size();
    const std::size_t first = first_obs(spec);
    const Layout L(spec);
    const std::size_t P = L.size;
    const std::size_t nm = L.nm;

    std::vector<double> e(n, 0.0);
    std::vector<double> h(n, s2);
    std::vector<double> dh;
    std::vector<double> de;
    if (grad) {
        dh.assign(n * P, 0.0);
        de.assign(n * std::max<std::size_t>(nm, 1), 0.0);
        grad->assign(P, 0.0);
    }
    const auto eps_at = [&](std::size_t t, std::size_t lag) -> double {
        return t >= first + lag ? e[t - lag] : 0.0;
    };
    const auto h_at = [&](std::size_t t, std::size_t lag) -> double {
        return t >= first + lag ? h[t - lag] : s2;
    };

    double ll = 0.0;
    for (std::size_t t = first; t < n; ++t) {
        double m = 0.0;
        switch (spec.mean) {
            case MeanModel::Zero: break;
            case MeanModel::Constant: m = prm.mean[0]; break;
            case MeanModel::Ar1: m = prm.mean[0] + prm.mean[1] * r[t - 1]; break;
        }
        e[t] = r[t] - m;

        double ht = prm.omega;
        for (std::size_t i = 1; i <= spec.p; ++i) {
            const double ei = eps_at(t, i);
            ht += prm.alphas[i - 1] * ei * ei;
        }
        const double e1 = eps_at(t, 1);
        const double neg1 = (spec.leverage && e1 < 0.0) ? 1.0 : 0.0;
        if (spec.leverage) ht += prm.leverage * neg1 * e1 * e1;
        for (std::size_t j = 1; j <= spec.q; ++j) ht += prm.gammas[j - 1] * h_at(t, j);
        h[t] = ht;
        if (!(ht > 0.0) || !std::isfinite(ht)) {
            if (path) {
                path->residuals = e;
                path->cond_variance = h;
                path->first = first;
                path->log_likelihood = -std::numeric_limits<double>::infinity();
            }
            return -std::numeric_limits<double>::infinity();
        }
        const double et = e[t];
        ll += -0.5 * (kLog2Pi + std::log(ht) + et * et / ht);

        if (!grad) continue;
        double* dht = &dh[t * P];
        double* det = nm > 0 ? &de[t * nm] : nullptr;
        // Residual sensitivities to the mean parameters.
        if (spec.mean == MeanModel::Constant) {
            det[0] = -1.0;
        } else if (spec.mean == MeanModel::Ar1) {
            det[0] = -1.0;
            det[1] = -r[t - 1];
        }
        // Direct terms.
        for (std::size_t k = 0; k < nm; ++k) {
            double acc = 0.0;
            for (std::size_t i = 1; i <= spec.p; ++i) {
                if (t < first + i) continue;
                const std::size_t s = t - i;
                acc += prm.alphas[i - 1] * 2.0 * e[s] * de[s * nm + k];
            }
            if (spec.leverage && t >= first + 1 && neg1 > 0.0) {
                acc += prm.leverage * 2.0 * e1 * de[(t - 1) * nm + k];
            }
            dht[k] = acc;
        }
        dht[L.iw] = 1.0;
        for (std::size_t i = 1; i <= spec.p; ++i) {
            const double ei = eps_at(t, i);
            dht[L.ia + i - 1] = ei * ei;
        }
        if (spec.leverage) dht[L.il] = neg1 * e1 * e1;
        for (std::size_t j = 1; j <= spec.q; ++j) dht[L.ig + j - 1] = h_at(t, j);
        // Recursive terms.
        for (std::size_t j = 1; j <= spec.q; ++j) {
            if (t < first + j) continue;
            const double g = prm.gammas[j - 1];
            const double* prev = &dh[(t - j) * P];
            for (std::size_t k = 0; k < P; ++k) dht[k] += g * prev[k];
        }
        const double a = 1.0 / ht - et * et / (ht * ht);
        const double b = 2.0 * et / ht;
        for (std::size_t k = 0; k < P; ++k) {
            double d = a * dht[k];
            if (k < nm) d += b * det[k];
            (*grad)[k] += -0.5 * d;
        }
    }
    if (path) {
        path->residuals = std::move(e);
        path->cond_variance = std::move(h);
        path->first = first;
        path->log_likelihood = ll;
    }
    return ll;
}

// Unconstrained coordinates: scaled mean, log omega, softmax logits over the
// persistence components with an implicit zero-logit slack.
class Transform {
public:
    Transform(const GarchSpec& spec, double scale) : spec_(spec), L_(spec), scale_(scale) {
        k_ = spec.p + spec.q + (spec.leverage ? 1 : 0);
    }

    [[nodiscard]] std::size_t size() const { return L_.nm + 1 + k_; }

    [[nodiscard]] std::vector<double> components(std::span<const double> u) const {
        double mx = 0.0;
        for (double v : u) mx = std::max(mx, v);
        double denom = std::exp(-mx);
        std::vector<double> c(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            c[i] = std::exp(u[i] - mx);
            denom += c[i];
        }
        for (double& v : c) v /= denom;
        return c;
    }

    [[nodiscard]] GarchParams to_params(std::span<const double> theta) const {
        GarchParams prm;
        const std::size_t nm = L_.nm;
        if (spec_.mean == MeanModel::Constant) prm.mean = {scale_ * theta[0]};
        if (spec_.mean == MeanModel::Ar1) prm.mean = {scale_ * theta[0], theta[1]};
        prm.omega = std::exp(theta[nm]);
        const auto c = components(theta.subspan(nm + 1, k_));
        prm.alphas.assign(spec_.p, 0.0);
        prm.gammas.assign(spec_.q, 0.0);
        std::size_t idx = 0;
        if (spec_.leverage) {
            prm.alphas[0] = 2.0 * c[0];
            prm.leverage = 2.0 * (c[1] - c[0]);
            idx = 2;
            for (std::size_t i = 1; i < spec_.p; ++i) prm.alphas[i] = c[idx++];
        } else {
            for (std::size_t i = 0; i < spec_.p; ++i) prm.alphas[i] = c[idx++];
        }
        for (std::size_t j = 0; j < spec_.q; ++j) prm.gammas[j] = c[idx++];
        return prm;
    }

    [[nodiscard]] std::vector<double> from_params(const GarchParams& prm) const {
        std::vector<double> theta(size(), 0.0);
        const std::size_t nm = L_.nm;
        if (spec_.mean == MeanModel::Constant) theta[0] = prm.mean[0] / scale_;
        if (spec_.mean == MeanModel::Ar1) {
            theta[0] = prm.mean[0] / scale_;
            theta[1] = prm.mean[1];
        }
        theta[nm] = std::log(prm.omega);
        std::vector<double> c;
        if (spec_.leverage) {
            c.push_back(prm.alphas[0] / 2.0);
            c.push_back((prm.alphas[0] + prm.leverage) / 2.0);
            for (std::size_t i = 1; i < spec_.p; ++i) c.push_back(prm.alphas[i]);
        } else {
            c.insert(c.end(), prm.alphas.begin(), prm.alphas.end());
        }
        c.insert(c.end(), prm.gammas.begin(), prm.gammas.end());
        double total = 0.0;
        for (double& v : c) {
            v = std::max(v, 1e-8);
            total += v;
        }
        const double slack = std::max(1.0 - total, 1e-8);
        for (std::size_t i = 0; i < c.size(); ++i) theta[nm + 1 + i] = std::log(c[i] / slack);
        return theta;
    }

    /// Chain rule from the packed natural gradient to theta.
    [[nodiscard]] std::vector<double> pull_back(std::span<const double> theta,
                                                std::span<const double> g_nat) const {
        std::vector<double> g(size(), 0.0);
        const std::size_t nm = L_.nm;
        if (spec_.mean == MeanModel::Constant) g[0] = g_nat[0] * scale_;
        if (spec_.mean == MeanModel::Ar1) {
            g[0] = g_nat[0] * scale_;
            g[1] = g_nat[1];
        }
        g[nm] = g_nat[L_.iw] * std::exp(theta[nm]);
        const auto c = components(theta.subspan(nm + 1, k_));
        std::vector<double> gc(k_, 0.0);
        std::size_t idx = 0;
        if (spec_.leverage) {
            const double ga1 = g_nat[L_.ia];
            const double gl = g_nat[L_.il];
            gc[0] = 2.0 * ga1 - 2.0 * gl;
            gc[1] = 2.0 * gl;
            idx = 2;
            for (std::size_t i = 1; i < spec_.p; ++i) gc[idx++] = g_nat[L_.ia + i];
        } else {
            for (std::size_t i = 0; i < spec_.p; ++i) gc[idx++] = g_nat[L_.ia + i];
        }
        for (std::size_t j = 0; j < spec_.q; ++j) gc[idx++] = g_nat[L_.ig + j];
        double avg = 0.0;
        for (std::size_t i = 0; i < k_; ++i) avg += gc[i] * c[i];
        for (std::size_t i = 0; i < k_; ++i) g[nm + 1 + i] = c[i] * (gc[i] - avg);
        return g;
    }

private:
    GarchSpec spec_;
    Layout L_;
    double scale_;
    std::size_t k_;
};

GarchParams initial_params(const GarchSpec& spec, std::span<const double> r, double s2) {
    GarchParams prm;
    const double mean = simd::sum(r) / static_cast<double>(r.size());
    if (spec.mean == MeanModel::Constant) prm.mean = {mean};
    if (spec.mean == MeanModel::Ar1) prm.mean = {mean, 0.0};
    const double arch_total = spec.q > 0 ? 0.05 : 0.3;
    const double garch_total = spec.q > 0 ? 0.90 : 0.0;
    prm.alphas.assign(spec.p, spec.p > 0 ? arch_total / static_cast<double>(spec.p) : 0.0);
    prm.gammas.assign(spec.q, spec.q > 0 ? garch_total / static_cast<double>(spec.q) : 0.0);
    double pers = 0.0;
    for (double a : prm.alphas) pers += a;
    for (double g : prm.gammas) pers += g;
    if (spec.p == 0) pers = garch_total;
    prm.omega = s2 * std::max(1.0 - pers, 0.05);
    return prm;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_string(MeanModel m) {
    switch (m) {
        case MeanModel::Zero: return "zero";
        case MeanModel::Constant: return "constant";
        case MeanModel::Ar1: return "ar1";
    }
    return "constant";
}

MeanModel parse_mean_model(const std::string& s) {
    if (s == "zero") return MeanModel::Zero;
    if (s == "constant") return MeanModel::Constant;
    if (s == "ar1") return MeanModel::Ar1;
    throw std::invalid_argument("unknown mean model '" + s + "' (expected zero|constant|ar1)");
}

double GarchParams::persistence() const {
    double s = leverage / 2.0;
    for (double a : alphas) s += a;
    for (double g : gammas) s += g;
    return s;
}

std::vector<double> GarchParams::pack(const GarchSpec& spec) const {
    std::vector<double> v(mean);
    v.push_back(omega);
    v.insert(v.end(), alphas.begin(), alphas.end());
    if (spec.leverage) v.push_back(leverage);
    v.insert(v.end(), gammas.begin(), gammas.end());
    return v;
}

GarchParams GarchParams::unpack(const GarchSpec& spec, std::span<const double> v) {
    const Layout L(spec);
    if (v.size() != L.size) throw std::invalid_argument("garch: packed parameter length mismatch");
    GarchParams prm;
    prm.mean.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(L.nm));
    prm.omega = v[L.iw];
    prm.alphas.assign(v.begin() + static_cast<std::ptrdiff_t>(L.ia),
                      v.begin() + static_cast<std::ptrdiff_t>(L.ia + spec.p));
    if (spec.leverage) prm.leverage = v[L.il];
    prm.gammas.assign(v.begin() + static_cast<std::ptrdiff_t>(L.ig), v.end());
    return prm;
}

std::vector<std::string> GarchParams::names(const GarchSpec& spec) {
    std::vector<std::string> out;
    if (spec.mean == MeanModel::Constant) out.push_back("mu");
    if (spec.mean == MeanModel::Ar1) {
        out.push_back("c");
        out.push_back("phi");
    }
    out.push_back("omega");
    for (std::size_t i = 1; i <= spec.p; ++i) out.push_back("alpha" + std::to_string(i));
    if (spec.leverage) out.push_back("leverage");
    for (std::size_t j = 1; j <= spec.q; ++j) out.push_back("gamma" + std::to_string(j));
    return out;
}

GarchPath garch_filter(std::span<const double> r, const GarchSpec& spec, const GarchParams& params,
                       double presample_variance) {
    validate(spec, params);
    if (r.size() < 2) throw DataError("garch_filter: need at least 2 returns");
    const double s2 = presample_variance > 0.0 ? presample_variance : sample_variance(r);
    GarchPath path;
    evaluate(r, spec, params, s2, nullptr, &path);
    return path;
}

double garch_log_likelihood(std::span<const double> r, const GarchSpec& spec,
                            const GarchParams& params) {
    validate(spec, params);
    if (r.size() < 2) throw DataError("garch: need at least 2 returns");
    return evaluate(r, spec, params, sample_variance(r), nullptr, nullptr);
}

std::vector<double> garch_gradient(std::span<const double> r, const GarchSpec& spec,
                                   const GarchParams& params) {
    validate(spec, params);
    if (r.size() < 2) throw DataError("garch: need at least 2 returns");
    std::vector<double> g;
    evaluate(r, spec, params, sample_variance(r), &g, nullptr);
    return g;
}

GarchFit fit_garch(std::span<const double> r, const GarchSpec& spec, const FitOptions& opts) {
    validate(spec);
    const std::size_t min_len = 50 * (spec.p + spec.q);
    if (r.size() < min_len) {
        throw DataError("fit_garch: " + std::to_string(r.size()) + " returns, need at least " +
                        std::to_string(min_len));
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i])) throw DataError("fit_garch: non-finite return at index " + std::to_string(i));
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    const double s2 = sample_variance(r);
    if (*lo == *hi || !(s2 > 0.0)) throw DataError("fit_garch: constant return series");

    const Transform tf(spec, std::sqrt(s2));
    const double n_eff = static_cast<double>(r.size() - first_obs(spec));

    // Objective: negative mean log-likelihood and its theta gradient.
    const auto objective = [&](const std::vector<double>& theta, Eigen::VectorXd* grad) {
        const GarchParams prm = tf.to_params(theta);
        std::vector<double> g_nat;
        const double ll = evaluate(r, spec, prm, s2, grad ? &g_nat : nullptr, nullptr);
        if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
        if (grad) {
            const auto g = tf.pull_back(theta, g_nat);
            *grad = -to_eigen(g) / n_eff;
        }
        return -ll / n_eff;
    };

    std::vector<double> theta = tf.from_params(initial_params(spec, r, s2));
    const auto P = static_cast<Eigen::Index>(theta.size());
    Eigen::VectorXd g(P);
    double f = objective(theta, &g);
    if (!std::isfinite(f)) throw NumericalError("fit_garch: infeasible starting point");
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(P, P);
    bool fresh = true;
    bool converged = false;
    std::size_t iter = 0;

    for (; iter < opts.max_iterations; ++iter) {
        Eigen::VectorXd d = -Hinv * g;
        if (!(g.dot(d) < 0.0)) {
            Hinv.setIdentity();
            d = -g;
            fresh = true;
        }
        double step = fresh ? std::min(1.0, 1.0 / std::max(d.norm(), 1e-300)) : 1.0;
        const double slope = g.dot(d);
        std::vector<double> trial(theta.size());
        Eigen::VectorXd g_new(P);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (Eigen::Index k = 0; k < P; ++k) trial[static_cast<std::size_t>(k)] = theta[static_cast<std::size_t>(k)] + step * d(k);
            f_new = objective(trial, &g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                Hinv.setIdentity();
                fresh = true;
                continue;
            }
            converged = g.norm() < 1e-3;
            break;
        }
        const double improvement = (f - f_new) * n_eff;
        const Eigen::VectorXd s = step * d;
        const Eigen::VectorXd y = g_new - g;
        theta = trial;
        f = f_new;
        g = g_new;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) Hinv *= sy / y.squaredNorm();
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P, P);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) +
                   rho * s * s.transpose();
            fresh = false;
        }
        if (improvement < opts.tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("fit_garch: no convergence after " + std::to_string(iter) +
                             " iterations, gradient norm " + csv::format_double(g.norm()));
    }

    GarchFit fit;
    fit.spec = spec;
    fit.params = tf.to_params(theta);
    GarchPath path;
    evaluate(r, spec, fit.params, s2, nullptr, &path);
    fit.residuals = std::move(path.residuals);
    fit.cond_variance = std::move(path.cond_variance);
    fit.log_likelihood = path.log_likelihood;
    fit.persistence = fit.params.persistence();
    fit.presample_variance = s2;
    fit.last_return = r.back();
    fit.n_obs = r.size();
    fit.iterations = iter;
    fit.gradient_norm = g.norm();

    const std::size_t np = Layout(spec).size;
    fit.standard_errors.assign(np, std::numeric_limits<double>::quiet_NaN());
    if (opts.standard_errors) {
        // Observed information from central differences of the analytic gradient.
        const std::vector<double> psi = fit.params.pack(spec);
        const Layout L(spec);
        Eigen::MatrixXd H(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
        for (std::size_t l = 0; l < np; ++l) {
            double floor = 1e-2;
            if (l < L.nm && !(spec.mean == MeanModel::Ar1 && l == 1)) floor = 1e-2 * std::sqrt(s2);
            if (l == L.iw) floor = std::abs(psi[l]);
            const double h = 1e-4 * std::max(std::abs(psi[l]), floor);
            std::vector<double> up = psi;
            std::vector<double> dn = psi;
            up[l] += h;
            dn[l] -= h;
            std::vector<double> gu;
            std::vector<double> gd;
            evaluate(r, spec, GarchParams::unpack(spec, up), s2, &gu, nullptr);
            evaluate(r, spec, GarchParams::unpack(spec, dn), s2, &gd, nullptr);
            for (std::size_t k = 0; k < np; ++k) {
                H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = -(gu[k] - gd[k]) / (2.0 * h);
            }
        }
        const Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());
        // Equilibrate: omega and the ARCH terms differ by many orders of magnitude.
        Eigen::VectorXd d(Hs.rows());
        for (Eigen::Index k = 0; k < Hs.rows(); ++k) {
            const double a = std::abs(Hs(k, k));
            d(k) = a > 0.0 && std::isfinite(a) ? 1.0 / std::sqrt(a) : 1.0;
        }
        const Eigen::MatrixXd Hn = d.asDiagonal() * Hs * d.asDiagonal();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Hn);
        if (lu.isInvertible()) {
            const Eigen::MatrixXd cov = d.asDiagonal() * lu.inverse() * d.asDiagonal();
            for (std::size_t k = 0; k < np; ++k) {
                const double v = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
                if (v > 0.0 && std::isfinite(v)) fit.standard_errors[k] = std::sqrt(v);
            }
        }
    }
    return fit;
}

GarchFit fit_tgarch(std::span<const double> r, const FitOptions& opts) {
    GarchSpec spec;
    spec.leverage = true;
    return fit_garch(r, spec, opts);
}

Forecast forecast(const GarchFit& fit, std::size_t horizon) {
    if (horizon == 0) throw std::invalid_argument("forecast: horizon must be >= 1");
    const auto& spec = fit.spec;
    const auto& prm = fit.params;
    const std::size_t n = fit.residuals.size();
    if (n == 0) throw std::invalid_argument("forecast: fit holds no data");
    const std::size_t first = first_obs(spec);

    // Known history: squared residual, negative-part squared residual, variance.
    const auto e2_hist = [&](std::ptrdiff_t t) {
        return t >= static_cast<std::ptrdiff_t>(first) ? fit.residuals[static_cast<std::size_t>(t)] * fit.residuals[static_cast<std::size_t>(t)] : 0.0;
    };
    const auto neg_hist = [&](std::ptrdiff_t t) {
        if (t < static_cast<std::ptrdiff_t>(first)) return 0.0;
        const double e = fit.residuals[static_cast<std::size_t>(t)];
        return e < 0.0 ? e * e : 0.0;
    };
    const auto h_hist = [&](std::ptrdiff_t t) {
        return t >= static_cast<std::ptrdiff_t>(first) ? fit.cond_variance[static_cast<std::size_t>(t)] : fit.presample_variance;
    };

    Forecast out;
    out.variance_path.resize(horizon);
    out.mean_path.resize(horizon);
    const auto T = static_cast<std::ptrdiff_t>(n) - 1;
    for (std::size_t k = 1; k <= horizon; ++k) {
        const auto t = T + static_cast<std::ptrdiff_t>(k);
        const auto future_h = [&](std::ptrdiff_t s) { return out.variance_path[static_cast<std::size_t>(s - T - 1)]; };
        double h = prm.omega;
        for (std::size_t i = 1; i <= spec.p; ++i) {
            const auto s = t - static_cast<std::ptrdiff_t>(i);
            h += prm.alphas[i - 1] * (s > T ? future_h(s) : e2_hist(s));
        }
        if (spec.leverage) {
            const auto s = t - 1;
            h += prm.leverage * (s > T ? 0.5 * future_h(s) : neg_hist(s));
        }
        for (std::size_t j = 1; j <= spec.q; ++j) {
            const auto s = t - static_cast<std::ptrdiff_t>(j);
            h += prm.gammas[j - 1] * (s > T ? future_h(s) : h_hist(s));
        }
        out.variance_path[k - 1] = h;
    }
    double prev = fit.last_return;
    for (std::size_t k = 0; k < horizon; ++k) {
        double m = 0.0;
        if (spec.mean == MeanModel::Constant) m = prm.mean[0];
        if (spec.mean == MeanModel::Ar1) m = prm.mean[0] + prm.mean[1] * prev;
        out.mean_path[k] = m;
        prev = m;
    }
    return out;
}

std::vector<double> simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n,
                             std::uint64_t seed, std::size_t burn_in) {
    validate(spec, params);
    if (!(params.omega > 0.0)) throw std::invalid_argument("simulate: omega must be positive");
    const double pers = params.persistence();
    const double h0 = pers < 1.0 ? params.omega / (1.0 - pers) : params.omega;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t total = n + burn_in;
    const std::size_t P = spec.p;
    const std::size_t Q = spec.q;
    std::vector<double> e(total, 0.0);
    std::vector<double> h(total, h0);
    std::vector<double> r(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        double ht = params.omega;
        for (std::size_t i = 1; i <= P; ++i) {
            const double ei = t >= i ? e[t - i] : 0.0;
            const double e2 = t >= i ? ei * ei : h0;
            ht += params.alphas[i - 1] * e2;
        }
        if (spec.leverage && t >= 1 && e[t - 1] < 0.0) ht += params.leverage * e[t - 1] * e[t - 1];
        for (std::size_t j = 1; j <= Q; ++j) ht += params.gammas[j - 1] * (t >= j ? h[t - j] : h0);
        h[t] = ht;
        e[t] = std::sqrt(ht) * z(rng);
        double m = 0.0;
        if (spec.mean == MeanModel::Constant) m = params.mean[0];
        if (spec.mean == MeanModel::Ar1) m = params.mean[0] + params.mean[1] * (t > 0 ? r[t - 1] : 0.0);
        r[t] = m + e[t];
    }
    return {r.begin() + static_cast<std::ptrdiff_t>(burn_in), r.end()};
}

void write_fit(std::ostream& out, const GarchFit& fit) {
    csv::Writer w(out);
    w.header({"parameter", "estimate", "std_error"});
    const auto names = GarchParams::names(fit.spec);
    const auto values = fit.params.pack(fit.spec);
    for (std::size_t i = 0; i < names.size(); ++i) {
        w.field(names[i]).field(values[i]);
        if (std::isfinite(fit.standard_errors[i])) {
            w.field(fit.standard_errors[i]);
        } else {
            w.empty_field();
        }
        w.end_row();
    }
    w.field("persistence").field(fit.persistence).empty_field().end_row();
    w.field("log_likelihood").field(fit.log_likelihood).empty_field().end_row();
    w.field("n_obs").field(fit.n_obs).empty_field().end_row();
}

}  // namespace flowtox::volatility

namespace flowtox::volatility {

GarchTracker::GarchTracker(const GarchFit& fit)
    : spec_(fit.spec),
      params_(fit.params),
      eps_(fit.spec.p, 0.0),
      h_(fit.spec.q, fit.presample_variance) {}

double GarchTracker::next_mean() const {
    switch (spec_.mean) {
        case MeanModel::Zero: return 0.0;
        case MeanModel::Constant: return params_.mean[0];
        case MeanModel::Ar1: return params_.mean[0] + params_.mean[1] * prev_return_;
    }
    return 0.0;
}

double GarchTracker::next_variance() const {
    double h = params_.omega;
    for (std::size_t i = 0; i < spec_.p; ++i) h += params_.alphas[i] * eps_[i] * eps_[i];
    if (spec_.leverage && spec_.p > 0 && eps_[0] < 0.0) h += params_.leverage * eps_[0] * eps_[0];
    for (std::size_t j = 0; j < spec_.q; ++j) h += params_.gammas[j] * h_[j];
    return h;
}

void GarchTracker::update(double r) {
    if (spec_.mean == MeanModel::Ar1 && !primed_) {
        // The first AR(1) return only conditions the mean, as in garch_filter.
        primed_ = true;
        prev_return_ = r;
        return;
    }
    const double h = next_variance();
    const double e = r - next_mean();
    if (!eps_.empty()) {
        std::rotate(eps_.rbegin(), eps_.rbegin() + 1, eps_.rend());
        eps_[0] = e;
    }
    if (!h_.empty()) {
        std::rotate(h_.rbegin(), h_.rbegin() + 1, h_.rend());
        h_[0] = h;
    }
    prev_return_ = r;
}

}  // namespace flowtox::volatility
