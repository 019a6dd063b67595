#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace flowtox::svm {

/// Dense row-major feature matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    [[nodiscard]] static Matrix from_rows(const std::vector<std::vector<double>>& rows);
};

enum class KernelType { Linear, Rbf };

struct Kernel {
    KernelType type = KernelType::Rbf;
    double sigma = 1.0;  ///< RBF width; ignored by the linear kernel

    [[nodiscard]] double operator()(std::span<const double> a, std::span<const double> b) const;
    [[nodiscard]] static Kernel linear() { return {KernelType::Linear, 1.0}; }
    [[nodiscard]] static Kernel rbf(double sigma) { return {KernelType::Rbf, sigma}; }
};

/// exp(-||a - b||^2 / (2 sigma^2)).
[[nodiscard]] double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma);
[[nodiscard]] double linear_kernel(std::span<const double> a, std::span<const double> b);

/// Per-column affine map to zero mean and unit variance.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;  ///< population std; 1 for constant columns

    [[nodiscard]] static Standardizer fit(const Matrix& X);
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
    [[nodiscard]] Matrix apply(const Matrix& X) const;
    [[nodiscard]] bool empty() const { return mean.empty(); }
};

struct SvmModel {
    Kernel kernel;
    double C = 1.0;
    double tol = 1e-3;
    std::size_t dim = 0;
    Matrix support_vectors;
    std::vector<double> dual_coefs;  ///< alpha_i * y_i
    double bias = 0.0;
    /// Applied to inputs before the kernel when non-empty.
    Standardizer scaler;

    /// sum_i dual_coefs[i] * K(sv_i, x) + bias, on standardized input.
    [[nodiscard]] double decision(std::span<const double> x) const;
    /// Sign of the decision value; 0 maps to +1.
    [[nodiscard]] int predict(std::span<const double> x) const;
    [[nodiscard]] bool trained() const { return support_vectors.rows > 0; }
};

struct SmoOptions {
    double C = 1.0;
    double tol = 1e-3;
    /// 0 selects max(10^7, 100 n).
    std::size_t max_iterations = 0;
    /// Kernel row cache budget.
    std::size_t cache_bytes = 64u << 20;
    bool record_objective = false;
};

struct TrainResult {
    SvmModel model;
    std::vector<double> alphas;  ///< one per training row
    std::size_t iterations = 0;
    /// Dual objective sum(alpha) - 1/2 alpha'Q alpha after each iteration.
    std::vector<double> objective_trace;
};

/// Soft-margin C-SVM dual solved by SMO with maximal-violating-pair working
/// sets. Labels must be -1 or +1 with both classes present.
[[nodiscard]] TrainResult train_smo(const Matrix& X, std::span<const int> y, const Kernel& kernel,
                                    const SmoOptions& opts = {});

[[nodiscard]] int predict(const SvmModel& model, std::span<const double> x);

/// Versioned text format; doubles are written in shortest round-trip form.
void save_model(std::ostream& out, const SvmModel& model);
[[nodiscard]] SvmModel load_model(std::istream& in);

}  // namespace flowtox::svm
