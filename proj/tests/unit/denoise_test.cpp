#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "flowtox/denoise.hpp"
#include "test_support.hpp"

using namespace flowtox::denoise;
using flowtox::testing::normals;

namespace {

double energy(const WaveletDecomposition& d) {
    double e = 0.0;
    for (double a : d.approximation) e += a * a;
    for (const auto& lv : d.details)
        for (double x : lv) e += x * x;
    return e;
}

}  // namespace

TEST(HaarDwt, HandExamples) {
    const std::vector<double> ones{1, 1, 1, 1};
    const auto d = haar_dwt(ones, 1);
    ASSERT_EQ(d.approximation.size(), 2u);
    EXPECT_NEAR(d.approximation[0], std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(d.approximation[1], std::numbers::sqrt2, 1e-15);
    EXPECT_EQ(d.details[0], (std::vector<double>{0.0, 0.0}));

    const std::vector<double> pm{1, -1};
    const auto e = haar_dwt(pm, 1);
    EXPECT_EQ(e.approximation[0], 0.0);
    EXPECT_NEAR(e.details[0][0], std::numbers::sqrt2, 1e-15);
}

TEST(HaarDwt, ConstantHasZeroDetails) {
    const std::vector<double> c(256, 3.7);
    for (std::size_t level = 1; level <= 8; ++level) {
        const auto d = haar_dwt(c, level);
        ASSERT_EQ(d.details.size(), level);
        for (const auto& lv : d.details)
            for (double x : lv) EXPECT_EQ(x, 0.0);
    }
}

TEST(HaarDwt, LevelErrors) {
    const std::vector<double> x(10, 1.0);
    EXPECT_THROW((void)haar_dwt(x, 0), std::invalid_argument);
    EXPECT_THROW((void)haar_dwt(x, 4), std::invalid_argument);
    EXPECT_NO_THROW((void)haar_dwt(x, 3));
    EXPECT_EQ(max_level(10), 3u);
    EXPECT_EQ(max_level(1024), 10u);
}

TEST(HaarIdwt, PerfectReconstructionAndEnergy) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> len(2, 4096);
    std::vector<std::size_t> lengths{2, 3, 5, 7, 63, 64, 65, 1000, 4095, 4096};
    for (int i = 0; i < 40; ++i) lengths.push_back(len(rng));
    for (std::size_t n : lengths) {
        const auto x = normals(n, n);
        for (std::size_t level : {std::size_t{1}, std::min<std::size_t>(6, max_level(n)), max_level(n)}) {
            const auto d = haar_dwt(x, level);
            const auto y = haar_idwt(d);
            ASSERT_EQ(y.size(), n);
            double err = 0.0;
            for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(y[k] - x[k]));
            EXPECT_LT(err, 1e-10) << "n=" << n << " level=" << level;
            if (!std::any_of(d.padded.begin(), d.padded.end(), [](bool b) { return b; })) {
                double ex = 0.0;
                for (double v : x) ex += v * v;
                EXPECT_NEAR(energy(d) / ex, 1.0, 1e-9) << "n=" << n;
            }
        }
    }
}

TEST(HaarIdwt, ApproximationOnly) {
    const std::vector<double> x{1, 3};
    auto d = haar_dwt(x, 1);
    d.details[0][0] = 0.0;
    const auto y = haar_idwt(d);
    EXPECT_NEAR(y[0], 2.0, 1e-15);
    EXPECT_NEAR(y[1], 2.0, 1e-15);
}

TEST(HaarIdwt, TamperedLength) {
    const auto x = normals(64, 1);
    auto d = haar_dwt(x, 3);
    d.details[1].pop_back();
    EXPECT_THROW((void)haar_idwt(d), std::invalid_argument);
    auto e = haar_dwt(x, 3);
    e.approximation.push_back(0.0);
    EXPECT_THROW((void)haar_idwt(e), std::invalid_argument);
}

TEST(HaarDwt, ShiftChangesOnlyApproximation) {
    const auto x = normals(1000, 5);
    auto y = x;
    for (double& v : y) v += 42.0;
    const auto a = haar_dwt(x, 6);
    const auto b = haar_dwt(y, 6);
    for (std::size_t k = 0; k < a.details.size(); ++k)
        for (std::size_t i = 0; i < a.details[k].size(); ++i) EXPECT_NEAR(a.details[k][i], b.details[k][i], 1e-12);
    EXPECT_NE(a.approximation[0], b.approximation[0]);
}

TEST(SoftThreshold, Examples) {
    WaveletDecomposition d;
    d.level = 1;
    d.approximation = {5.0};
    d.details = {{3.0, -0.5}};
    d.original_length = 2;
    d.padded = {false};
    const auto same = soft_threshold(d, 0.0);
    EXPECT_EQ(same.details, d.details);
    const auto s = soft_threshold(d, 1.0);
    EXPECT_EQ(s.details[0][0], 2.0);
    EXPECT_EQ(s.details[0][1], 0.0);
    EXPECT_EQ(s.approximation, d.approximation);
    EXPECT_THROW((void)soft_threshold(d, -1.0), std::invalid_argument);
}

TEST(SoftThreshold, FullShrinkageGivesBlockMeans) {
    const std::vector<double> x{1, 3, 5, 7, 2, 2, 4, 8};
    const auto d = haar_dwt(x, 2);
    const auto y = haar_idwt(soft_threshold(d, 1e9));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y[i], 4.0, 1e-12);
    for (std::size_t i = 4; i < 8; ++i) EXPECT_NEAR(y[i], 4.0, 1e-12);
    const auto z = haar_idwt(soft_threshold(haar_dwt(x, 1), 1e9));
    EXPECT_NEAR(z[0], 2.0, 1e-12);
    EXPECT_NEAR(z[7], 6.0, 1e-12);
}

TEST(UniversalThreshold, Examples) {
    const auto d = haar_dwt(normals(1024, 3), 2);
    EXPECT_NEAR(universal_threshold(d, ThresholdMode::Unscaled), 3.723, 1e-3);
    EXPECT_NEAR(universal_threshold(d, ThresholdMode::Unscaled), std::sqrt(2.0 * std::log(1024.0)), 1e-12);

    WaveletDecomposition m;
    m.level = 1;
    m.original_length = 1024;
    m.approximation.assign(512, 0.0);
    m.details = {std::vector<double>(512)};
    for (std::size_t i = 0; i < 512; ++i) m.details[0][i] = i % 2 ? 0.6745 : -0.6745;
    m.padded = {false};
    EXPECT_NEAR(universal_threshold(m, ThresholdMode::Estimated), std::sqrt(2.0 * std::log(1024.0)), 1e-12);
}

TEST(Denoise, PiecewiseConstantBenchmark) {
    const std::size_t n = 4096;
    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) clean[i] = (i / 512) % 2 ? 4.0 : -2.0 + static_cast<double>(i / 1024);
    double power = 0.0;
    for (double v : clean) power += v * v;
    power /= static_cast<double>(n);
    // SNR 10 in amplitude terms.
    const double noise_sd = std::sqrt(power) / 10.0;
    const auto e = normals(n, 2718, noise_sd);
    std::vector<double> noisy(n);
    for (std::size_t i = 0; i < n; ++i) noisy[i] = clean[i] + e[i];
    const auto res = denoise(noisy, 6, ThresholdMode::Estimated);
    double mse_noisy = 0.0, mse_den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mse_noisy += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
        mse_den += (res.signal[i] - clean[i]) * (res.signal[i] - clean[i]);
    }
    EXPECT_LE(mse_den, 0.7 * mse_noisy);
    EXPECT_FALSE(res.level_capped);
}

TEST(Denoise, LevelCapped) {
    const auto x = normals(20, 1);
    const auto r = denoise(x, 6);
    EXPECT_TRUE(r.level_capped);
    EXPECT_EQ(r.level, 4u);
    EXPECT_EQ(r.signal.size(), 20u);
}

TEST(Denoise, Summary) {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{1, 2, 3, 6};
    const auto s = summarize(a, b);
    EXPECT_DOUBLE_EQ(s.mse, 1.0);
    EXPECT_GT(s.variance_after, s.variance_before);
}
