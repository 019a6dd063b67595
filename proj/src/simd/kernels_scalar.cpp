#include "flowtox/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flowtox::simd::scalar {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

double sum(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

CentralSums central_sums(std::span<const double> x, double center) {
    CentralSums out;
    for (double v : x) {
        const double d = v - center;
        const double d2 = d * d;
        out.m2 += d2;
        out.m3 += d2 * d;
        out.m4 += d2 * d2;
    }
    return out;
}

void haar_forward(std::span<const double> in, std::span<double> approx,
                  std::span<double> detail) {
    const std::size_t n = approx.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = in[2 * i];
        const double b = in[2 * i + 1];
        approx[i] = (a + b) * kInvSqrt2;
        detail[i] = (a - b) * kInvSqrt2;
    }
}

void haar_inverse(std::span<const double> approx, std::span<const double> detail,
                  std::span<double> out) {
    const std::size_t n = approx.size();
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = (approx[i] + detail[i]) * kInvSqrt2;
        out[2 * i + 1] = (approx[i] - detail[i]) * kInvSqrt2;
    }
}

void soft_threshold(std::span<double> x, double thr) {
    for (double& v : x) v = std::copysign(std::max(std::abs(v) - thr, 0.0), v);
}

}  // namespace

const KernelTable table{
    Isa::Scalar,    &sum,          &dot,         &squared_distance, &sum_abs_diff,
    &central_sums,  &haar_forward, &haar_inverse, &soft_threshold,
};

}  // namespace flowtox::simd::scalar
