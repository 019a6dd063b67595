#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "flowtox/error.hpp"
#include "flowtox/svm.hpp"

using namespace flowtox;
using namespace flowtox::svm;

namespace {

struct Problem {
    Matrix X;
    std::vector<int> y;
};

Problem separable4() {
    return {Matrix::from_rows({{2, 2}, {3, 3}, {-2, -2}, {-3, -3}}), {1, 1, -1, -1}};
}

Problem xor4() {
    return {Matrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}}), {-1, -1, 1, 1}};
}

// Points on either side of a random hyperplane with a guaranteed gap.
Problem random_separable(std::uint64_t seed, std::size_t n, std::size_t d) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> w(d);
    for (double& v : w) v = z(rng);
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    while (rows.size() < n) {
        std::vector<double> x(d);
        for (double& v : x) v = z(rng);
        const double s = std::inner_product(w.begin(), w.end(), x.begin(), 0.0) / norm;
        if (std::abs(s) < 0.3) continue;
        rows.push_back(x);
        y.push_back(s > 0 ? 1 : -1);
    }
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    return {Matrix::from_rows(rows), y};
}

double accuracy(const SvmModel& m, const Problem& p) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < p.X.rows; ++i) ok += m.predict(p.X.row(i)) == p.y[i];
    return static_cast<double>(ok) / static_cast<double>(p.X.rows);
}

}  // namespace

TEST(Kernel, RbfExamples) {
    const std::vector<double> a{1.0, 2.0, 3.0};
    EXPECT_EQ(rbf_kernel(a, a, 0.7), 1.0);
    const double sigma = 0.5;
    // ||a - b||^2 = 2 sigma^2
    const std::vector<double> b{1.0 + sigma, 2.0 + sigma, 3.0};
    EXPECT_NEAR(rbf_kernel(a, b, sigma), std::exp(-1.0), 1e-6);
    const std::vector<double> far{1.0 + 10 * sigma, 2.0, 3.0};
    const double k = rbf_kernel(a, far, sigma);
    EXPECT_GE(k, 0.0);
    EXPECT_LT(k, std::exp(-49.0));
    EXPECT_EQ(rbf_kernel(a, b, sigma), rbf_kernel(b, a, sigma));
    const std::vector<double> shorter{1.0};
    EXPECT_THROW((void)rbf_kernel(a, shorter, 1.0), std::invalid_argument);
    EXPECT_THROW((void)rbf_kernel(a, b, 0.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ(linear_kernel(a, b), 1.5 + 5.0 + 9.0);
}

TEST(Kernel, GramMatrixIsPsd) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    for (double sigma : {0.1, 1.0, 10.0}) {
        const std::size_t n = 40;
        std::vector<std::vector<double>> x(n, std::vector<double>(5));
        for (auto& r : x)
            for (double& v : r) v = z(rng);
        Eigen::MatrixXd K(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) K(i, j) = rbf_kernel(x[i], x[j], sigma);
        EXPECT_TRUE(K.isApprox(K.transpose(), 0.0));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(Smo, SeparableFixture) {
    const auto p = separable4();
    const auto res = train_smo(p.X, p.y, Kernel::linear(), {.C = 10.0});
    EXPECT_EQ(accuracy(res.model, p), 1.0);
    // Maximum-margin hyperplane x1 + x2 = 0 with w = (1/4, 1/4).
    EXPECT_NEAR(res.model.bias, 0.0, 1e-3);
    const std::vector<double> sv{2, 2};
    EXPECT_NEAR(res.model.decision(sv), 1.0, 1e-3);
    for (std::size_t i = 0; i < p.X.rows; ++i) EXPECT_EQ(predict(res.model, p.X.row(i)), p.y[i]);
}

TEST(Smo, XorFixture) {
    const auto p = xor4();
    const auto res = train_smo(p.X, p.y, Kernel::rbf(1.0), {.C = 100.0});
    EXPECT_EQ(accuracy(res.model, p), 1.0);
    const std::vector<double> pos{0, 1};
    EXPECT_EQ(res.model.predict(pos), 1);
}

TEST(Smo, KktAndBoxOnRandomProblems) {
    const double tol = 1e-3;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_separable(s, 60, 3);
        const double C = 10.0;
        const auto res = train_smo(p.X, p.y, Kernel::rbf(1.5), {.C = C, .tol = tol});
        double balance = 0.0;
        for (std::size_t i = 0; i < p.X.rows; ++i) {
            const double a = res.alphas[i];
            ASSERT_GE(a, 0.0);
            ASSERT_LE(a, C);
            balance += a * p.y[i];
            const double yf = p.y[i] * res.model.decision(p.X.row(i));
            if (a == 0.0) EXPECT_GE(yf, 1.0 - tol);
            else if (a == C) EXPECT_LE(yf, 1.0 + tol);
            else EXPECT_NEAR(yf, 1.0, tol);
        }
        EXPECT_NEAR(balance, 0.0, tol);
    }
}

TEST(Smo, ObjectiveNonDecreasing) {
    const auto p = random_separable(99, 80, 4);
    const auto res = train_smo(p.X, p.y, Kernel::rbf(1.0), {.C = 1.0, .record_objective = true});
    ASSERT_EQ(res.objective_trace.size(), res.iterations);
    ASSERT_GT(res.iterations, 2u);
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
        EXPECT_GE(res.objective_trace[k], res.objective_trace[k - 1] - 1e-12);
}

TEST(Smo, Errors) {
    const auto X = Matrix::from_rows({{0.0}, {1.0}, {2.0}});
    const std::vector<int> same{1, 1, 1};
    EXPECT_THROW((void)train_smo(X, same, Kernel::linear()), DataError);
    const std::vector<int> bad{1, 0, -1};
    EXPECT_THROW((void)train_smo(X, bad, Kernel::linear()), DataError);
    const std::vector<int> short_y{1, -1};
    EXPECT_THROW((void)train_smo(X, short_y, Kernel::linear()), std::invalid_argument);
    const std::vector<int> ok{1, -1, 1};
    EXPECT_THROW((void)train_smo(X, ok, Kernel::linear(), {.C = 0.0}), std::invalid_argument);
}

TEST(Predict, UntrainedAndDimension) {
    SvmModel empty;
    const std::vector<double> x{1.0};
    EXPECT_THROW((void)empty.predict(x), std::logic_error);
    const auto p = separable4();
    const auto res = train_smo(p.X, p.y, Kernel::linear(), {.C = 10.0});
    EXPECT_THROW((void)res.model.predict(x), std::invalid_argument);
}

TEST(Predict, InvariantToSupportVectorOrder) {
    const auto p = random_separable(5, 50, 3);
    const auto res = train_smo(p.X, p.y, Kernel::rbf(1.0), {.C = 5.0});
    SvmModel rev = res.model;
    const std::size_t n = rev.support_vectors.rows;
    ASSERT_GT(n, 1u);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = res.model.support_vectors.row(order[k]);
        std::copy(src.begin(), src.end(), rev.support_vectors.row(k).begin());
        rev.dual_coefs[k] = res.model.dual_coefs[order[k]];
    }
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x{z(rng), z(rng), z(rng)};
        EXPECT_NEAR(rev.decision(x), res.model.decision(x), 1e-12);
        EXPECT_EQ(rev.predict(x), res.model.predict(x));
    }
}

TEST(Model, SaveLoadRoundTrip) {
    const auto p = random_separable(8, 40, 2);
    auto res = train_smo(p.X, p.y, Kernel::rbf(0.8), {.C = 3.0});
    res.model.scaler = Standardizer::fit(p.X);
    std::stringstream ss;
    save_model(ss, res.model);
    const auto m = load_model(ss);
    EXPECT_EQ(m.C, res.model.C);
    EXPECT_EQ(m.kernel.sigma, res.model.kernel.sigma);
    EXPECT_EQ(m.dual_coefs, res.model.dual_coefs);
    EXPECT_EQ(m.support_vectors.data, res.model.support_vectors.data);
    EXPECT_EQ(m.scaler.mean, res.model.scaler.mean);
    for (std::size_t i = 0; i < p.X.rows; ++i) EXPECT_EQ(m.decision(p.X.row(i)), res.model.decision(p.X.row(i)));
    std::istringstream junk("not-a-model 1\n");
    EXPECT_THROW((void)load_model(junk), DataError);
}

TEST(StandardizerTest, ZeroMeanUnitVariance) {
    const auto X = Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}, {4, 5}});
    const auto s = Standardizer::fit(X);
    EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
    EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(1.25));
    EXPECT_EQ(s.scale[1], 1.0);
    const auto Z = s.apply(X);
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m += Z(i, 0);
    for (std::size_t i = 0; i < 4; ++i) v += Z(i, 0) * Z(i, 0);
    EXPECT_NEAR(m, 0.0, 1e-15);
    EXPECT_NEAR(v / 4.0, 1.0, 1e-15);
    EXPECT_EQ(Z(2, 1), 0.0);
}
