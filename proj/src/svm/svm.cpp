#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "flowtox/csv.hpp"
#include "flowtox/error.hpp"
#include "flowtox/simd/kernels.hpp"
#include "flowtox/svm.hpp"

namespace flowtox::svm {
namespace {

constexpr double kTau = 1e-12;
constexpr const char* kMagic = "flowtox-svm";
constexpr int kFormatVersion = 1;

// Rows of Q_ij = y_i y_j K(x_i, x_j), computed on demand with an LRU cache.
class QRows {
public:
    QRows(const Matrix& X, std::span<const int> y, const Kernel& k, std::size_t budget)
        : X_(X), y_(y), k_(k) {
        const std::size_t row_bytes = std::max<std::size_t>(X.rows * sizeof(double), 1);
        capacity_ = std::max<std::size_t>(2, budget / row_bytes);
    }

    const std::vector<double>& row(std::size_t i) {
        if (auto it = map_.find(i); it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        if (map_.size() >= capacity_) {
            map_.erase(lru_.back());
            lru_.pop_back();
        }
        std::vector<double> q(X_.rows);
        const auto xi = X_.row(i);
        const double yi = y_[i];
        for (std::size_t t = 0; t < X_.rows; ++t) q[t] = yi * y_[t] * k_(xi, X_.row(t));
        lru_.push_front(i);
        auto [it, ok] = map_.emplace(i, std::make_pair(std::move(q), lru_.begin()));
        return it->second.first;
    }

private:
    const Matrix& X_;
    std::span<const int> y_;
    Kernel k_;
    std::size_t capacity_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> map_;
};

std::string read_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("svm model: missing ") + what);
    return tok;
}

double read_double(std::istream& in, const char* what) {
    const auto tok = read_token(in, what);
    const auto v = csv::parse_double(tok);
    if (!v) throw DataError(std::string("svm model: bad number for ") + what + ": '" + tok + "'");
    return *v;
}

std::size_t read_size(std::istream& in, const char* what) {
    const auto tok = read_token(in, what);
    const auto v = csv::parse_int(tok);
    if (!v || *v < 0) throw DataError(std::string("svm model: bad count for ") + what + ": '" + tok + "'");
    return static_cast<std::size_t>(*v);
}

void expect(std::istream& in, const std::string& key) {
    const auto tok = read_token(in, key.c_str());
    if (tok != key) throw DataError("svm model: expected '" + key + "', found '" + tok + "'");
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols) throw std::invalid_argument("Matrix: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma) {
    if (a.size() != b.size()) throw std::invalid_argument("rbf_kernel: length mismatch");
    if (!(sigma > 0.0)) throw std::invalid_argument("rbf_kernel: sigma must be positive");
    return std::exp(-simd::squared_distance(a, b) / (2.0 * sigma * sigma));
}

double linear_kernel(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("linear_kernel: length mismatch");
    return simd::dot(a, b);
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    return type == KernelType::Rbf ? rbf_kernel(a, b, sigma) : linear_kernel(a, b);
}

Standardizer Standardizer::fit(const Matrix& X) {
    if (X.rows == 0) throw DataError("Standardizer: empty matrix");
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.scale.assign(X.cols, 1.0);
    const double n = static_cast<double>(X.rows);
    for (std::size_t j = 0; j < X.cols; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) m += X(i, j);
        m /= n;
        double v = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) v += (X(i, j) - m) * (X(i, j) - m);
        v /= n;
        s.mean[j] = m;
        s.scale[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean.size()) throw std::invalid_argument("Standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
}

Matrix Standardizer::apply(const Matrix& X) const {
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto z = apply(X.row(i));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

double SvmModel::decision(std::span<const double> x) const {
    if (!trained()) throw std::logic_error("svm: model has no support vectors (never trained)");
    if (x.size() != dim) {
        throw std::invalid_argument("svm: feature length " + std::to_string(x.size()) +
                                    " != model dimension " + std::to_string(dim));
    }
    std::vector<double> z;
    if (!scaler.empty()) {
        z = scaler.apply(x);
        x = z;
    }
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.rows; ++i) {
        f += dual_coefs[i] * kernel(support_vectors.row(i), x);
    }
    return f;
}

int SvmModel::predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }

int predict(const SvmModel& model, std::span<const double> x) { return model.predict(x); }

TrainResult train_smo(const Matrix& X, std::span<const int> y, const Kernel& kernel,
                      const SmoOptions& opts) {
    const std::size_t n = X.rows;
    if (y.size() != n) throw std::invalid_argument("train_smo: label count != row count");
    if (n < 2) throw DataError("train_smo: need at least 2 training rows");
    if (!(opts.C > 0.0)) throw std::invalid_argument("train_smo: C must be positive");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("train_smo: tol must be positive");
    if (kernel.type == KernelType::Rbf && !(kernel.sigma > 0.0)) {
        throw std::invalid_argument("train_smo: sigma must be positive");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] == 1) has_pos = true;
        else if (y[i] == -1) has_neg = true;
        else throw DataError("train_smo: label at row " + std::to_string(i) + " is not -1/+1");
    }
    if (!has_pos || !has_neg) throw DataError("train_smo: training labels contain a single class");
    for (double v : X.data) {
        if (!std::isfinite(v)) throw DataError("train_smo: non-finite feature value");
    }

    const double C = opts.C;
    const std::size_t max_iter =
        opts.max_iterations > 0 ? opts.max_iterations : std::max<std::size_t>(10'000'000, 100 * n);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> G(n, -1.0);
    std::vector<double> QD(n);
    for (std::size_t i = 0; i < n; ++i) QD[i] = kernel(X.row(i), X.row(i));
    QRows Q(X, y, kernel, opts.cache_bytes);

    const auto upper = [&](std::size_t t) { return alpha[t] >= C; };
    const auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    TrainResult res;
    std::size_t iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (!upper(t) && -G[t] > gmax) { gmax = -G[t]; i = t; }
                if (!lower(t) && G[t] > gmax2) { gmax2 = G[t]; j = t; }
            } else {
                if (!lower(t) && G[t] > gmax) { gmax = G[t]; i = t; }
                if (!upper(t) && -G[t] > gmax2) { gmax2 = -G[t]; j = t; }
            }
        }
        gap = gmax + gmax2;
        if (i == n || j == n || gap < opts.tol) break;
        if (iter >= max_iter) {
            std::size_t violating = 0;
            for (std::size_t t = 0; t < n; ++t) {
                const double v = -y[t] * G[t];
                const bool in_up = (y[t] == 1) ? !upper(t) : !lower(t);
                const bool in_low = (y[t] == 1) ? !lower(t) : !upper(t);
                if ((in_up && v > -gmax2 + opts.tol) || (in_low && v < gmax - opts.tol)) ++violating;
            }
            throw NumericalError("train_smo: no convergence after " + std::to_string(iter) +
                                 " iterations; " + std::to_string(violating) +
                                 " points violate KKT, maximal pair gap " + csv::format_double(gap));
        }
        ++iter;

        const std::vector<double> Qi = Q.row(i);
        const std::vector<double>& Qj = Q.row(j);
        const double ai_old = alpha[i];
        const double aj_old = alpha[j];
        if (y[i] != y[j]) {
            double quad = QD[i] + QD[j] + 2.0 * Qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = QD[i] + QD[j] - 2.0 * Qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double dai = alpha[i] - ai_old;
        const double daj = alpha[j] - aj_old;
        for (std::size_t t = 0; t < n; ++t) G[t] += Qi[t] * dai + Qj[t] * daj;

        if (opts.record_objective) {
            double f = 0.0;
            for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (G[t] - 1.0);
            res.objective_trace.push_back(-0.5 * f);
        }
    }

    // Bias from free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    SvmModel& m = res.model;
    m.kernel = kernel;
    m.C = C;
    m.tol = opts.tol;
    m.dim = X.cols;
    m.bias = -rho;
    std::size_t n_sv = 0;
    for (double a : alpha) n_sv += a > 0.0 ? 1 : 0;
    m.support_vectors = Matrix(n_sv, X.cols);
    std::size_t k = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!(alpha[t] > 0.0)) continue;
        std::copy(X.row(t).begin(), X.row(t).end(), m.support_vectors.row(k).begin());
        m.dual_coefs.push_back(alpha[t] * y[t]);
        ++k;
    }
    res.alphas = std::move(alpha);
    res.iterations = iter;
    return res;
}

void save_model(std::ostream& out, const SvmModel& m) {
    using csv::format_double;
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "kernel " << (m.kernel.type == KernelType::Rbf ? "rbf" : "linear") << '\n';
    out << "sigma " << format_double(m.kernel.sigma) << '\n';
    out << "C " << format_double(m.C) << '\n';
    out << "tol " << format_double(m.tol) << '\n';
    out << "bias " << format_double(m.bias) << '\n';
    out << "dim " << m.dim << '\n';
    out << "scaler " << (m.scaler.empty() ? 0 : 1) << '\n';
    if (!m.scaler.empty()) {
        out << "mean";
        for (double v : m.scaler.mean) out << ' ' << format_double(v);
        out << "\nscale";
        for (double v : m.scaler.scale) out << ' ' << format_double(v);
        out << '\n';
    }
    out << "n_sv " << m.support_vectors.rows << '\n';
    for (std::size_t i = 0; i < m.support_vectors.rows; ++i) {
        out << format_double(m.dual_coefs[i]);
        for (double v : m.support_vectors.row(i)) out << ' ' << format_double(v);
        out << '\n';
    }
}

SvmModel load_model(std::istream& in) {
    expect(in, kMagic);
    const std::size_t version = read_size(in, "format version");
    if (version != kFormatVersion) {
        throw DataError("svm model: unsupported format version " + std::to_string(version));
    }
    SvmModel m;
    expect(in, "kernel");
    const auto kt = read_token(in, "kernel type");
    if (kt == "rbf") m.kernel.type = KernelType::Rbf;
    else if (kt == "linear") m.kernel.type = KernelType::Linear;
    else throw DataError("svm model: unknown kernel '" + kt + "'");
    expect(in, "sigma");
    m.kernel.sigma = read_double(in, "sigma");
    expect(in, "C");
    m.C = read_double(in, "C");
    expect(in, "tol");
    m.tol = read_double(in, "tol");
    expect(in, "bias");
    m.bias = read_double(in, "bias");
    expect(in, "dim");
    m.dim = read_size(in, "dim");
    expect(in, "scaler");
    if (read_size(in, "scaler flag") == 1) {
        expect(in, "mean");
        for (std::size_t j = 0; j < m.dim; ++j) m.scaler.mean.push_back(read_double(in, "mean"));
        expect(in, "scale");
        for (std::size_t j = 0; j < m.dim; ++j) m.scaler.scale.push_back(read_double(in, "scale"));
    }
    expect(in, "n_sv");
    const std::size_t n_sv = read_size(in, "n_sv");
    m.support_vectors = Matrix(n_sv, m.dim);
    m.dual_coefs.resize(n_sv);
    for (std::size_t i = 0; i < n_sv; ++i) {
        m.dual_coefs[i] = read_double(in, "dual coefficient");
        for (std::size_t j = 0; j < m.dim; ++j) m.support_vectors(i, j) = read_double(in, "support vector");
    }
    return m;
}

}  // namespace flowtox::svm
