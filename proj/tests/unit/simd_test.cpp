#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "flowtox/simd/kernels.hpp"

using namespace flowtox::simd;

namespace {

std::vector<double> randv(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

const std::vector<std::size_t> kLengths{0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 1023, 4097};

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

}  // namespace

TEST(ScalarKernels, MatchNaiveLoops) {
    const auto& k = kernels_for(Isa::Scalar);
    for (std::size_t n : kLengths) {
        const auto a = randv(n, n + 1), b = randv(n, n + 1000);
        long double s = 0, d = 0, sq = 0, ab = 0, m2 = 0, m3 = 0, m4 = 0, sa = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s += a[i];
            d += static_cast<long double>(a[i]) * b[i];
            sq += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
            ab += std::abs(a[i] - b[i]);
            const long double c = a[i] - 0.5;
            m2 += c * c;
            m3 += c * c * c;
            m4 += c * c * c * c;
            sa += std::abs(a[i]);
        }
        const double scale = static_cast<double>(sa) + 1.0;
        EXPECT_TRUE(close(k.sum(a), static_cast<double>(s), scale)) << n;
        EXPECT_NEAR(k.dot(a, b), static_cast<double>(d), 1e-12 * scale * 10);
        EXPECT_NEAR(k.squared_distance(a, b), static_cast<double>(sq), 1e-12 * scale * 30);
        EXPECT_NEAR(k.sum_abs_diff(a, b), static_cast<double>(ab), 1e-12 * scale * 3);
        const auto cs = k.central_sums(a, 0.5);
        EXPECT_NEAR(cs.m2, static_cast<double>(m2), 1e-11 * static_cast<double>(m2 + 1));
        EXPECT_NEAR(cs.m3, static_cast<double>(m3), 1e-11 * static_cast<double>(m4 + 1));
        EXPECT_NEAR(cs.m4, static_cast<double>(m4), 1e-11 * static_cast<double>(m4 + 1));
    }
}

TEST(ScalarKernels, HaarAndThreshold) {
    const auto& k = kernels_for(Isa::Scalar);
    const std::vector<double> in{1, 3, 2, 2, 5, -1};
    std::vector<double> a(3), d(3), out(6);
    k.haar_forward(in, a, d);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(a[0], 4 * r, 1e-15);
    EXPECT_NEAR(d[0], -2 * r, 1e-15);
    EXPECT_NEAR(d[1], 0.0, 1e-15);
    EXPECT_NEAR(d[2], 6 * r, 1e-15);
    k.haar_inverse(a, d, out);
    for (std::size_t i = 0; i < in.size(); ++i) EXPECT_NEAR(out[i], in[i], 1e-14);

    std::vector<double> x{-3, -1, 0, 0.5, 2, 1};
    k.soft_threshold(x, 1.0);
    EXPECT_EQ(x, (std::vector<double>{-2, 0, 0, 0, 1, 0}));
}

class VariantEquivalence : public ::testing::TestWithParam<Isa> {};

TEST_P(VariantEquivalence, MatchesScalar) {
    if (!isa_available(GetParam())) GTEST_SKIP() << isa_name(GetParam()) << " not available";
    const auto& ref = kernels_for(Isa::Scalar);
    const auto& k = kernels_for(GetParam());
    EXPECT_EQ(k.isa, GetParam());
    for (std::size_t n : kLengths) {
        const auto a = randv(n, 7 * n + 3), b = randv(n, 11 * n + 5);
        double mag = 1.0;
        for (double v : a) mag += std::abs(v) * (1 + std::abs(v));
        // reductions: summation order differs
        EXPECT_NEAR(k.sum(a), ref.sum(a), 1e-12 * mag) << n;
        EXPECT_NEAR(k.dot(a, b), ref.dot(a, b), 1e-12 * mag * 10) << n;
        EXPECT_NEAR(k.squared_distance(a, b), ref.squared_distance(a, b), 1e-12 * mag * 30) << n;
        EXPECT_NEAR(k.sum_abs_diff(a, b), ref.sum_abs_diff(a, b), 1e-12 * mag * 3) << n;
        const auto c1 = k.central_sums(a, -0.25), c2 = ref.central_sums(a, -0.25);
        EXPECT_NEAR(c1.m2, c2.m2, 1e-12 * (c2.m2 + 1)) << n;
        EXPECT_NEAR(c1.m3, c2.m3, 1e-12 * (c2.m4 + 1)) << n;
        EXPECT_NEAR(c1.m4, c2.m4, 1e-12 * (c2.m4 + 1)) << n;

        // elementwise: bit-identical
        const std::size_t h = n / 2;
        const std::span<const double> in(a.data(), 2 * h);
        std::vector<double> a1(h), d1(h), a2(h), d2(h), o1(2 * h), o2(2 * h);
        k.haar_forward(in, a1, d1);
        ref.haar_forward(in, a2, d2);
        EXPECT_EQ(a1, a2) << n;
        EXPECT_EQ(d1, d2) << n;
        k.haar_inverse(a1, d1, o1);
        ref.haar_inverse(a2, d2, o2);
        EXPECT_EQ(o1, o2) << n;

        auto t1 = a, t2 = a;
        k.soft_threshold(t1, 1.3);
        ref.soft_threshold(t2, 1.3);
        EXPECT_EQ(t1, t2) << n;
    }
}

INSTANTIATE_TEST_SUITE_P(Isas, VariantEquivalence, ::testing::Values(Isa::Avx2, Isa::Neon),
                         [](const auto& info) { return std::string(isa_name(info.param)); });

TEST(Dispatch, NamesAndPinning) {
    EXPECT_EQ(isa_name(Isa::Scalar), "scalar");
    EXPECT_EQ(isa_name(Isa::Avx2), "avx2");
    EXPECT_EQ(isa_name(Isa::Neon), "neon");
    EXPECT_TRUE(isa_available(Isa::Scalar));
    const Isa before = active_isa();
    EXPECT_TRUE(isa_available(before));
    set_active_isa(Isa::Scalar);
    EXPECT_EQ(active_isa(), Isa::Scalar);
    const std::vector<double> x{1, 2, 3};
    EXPECT_EQ(sum(x), 6.0);
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (isa_available(isa)) {
            set_active_isa(isa);
            EXPECT_EQ(active_isa(), isa);
        } else {
            EXPECT_THROW(set_active_isa(isa), std::invalid_argument);
            EXPECT_THROW((void)kernels_for(isa), std::invalid_argument);
        }
    }
    set_active_isa(before);
}

TEST(Dispatch, EnvOverride) {
    const char* env = std::getenv("FLOWTOX_SIMD");
    if (env == nullptr) GTEST_SKIP() << "FLOWTOX_SIMD unset";
    EXPECT_EQ(isa_name(active_isa()), std::string_view(env));
}
