// aarch64 only. NEON is architecturally guaranteed there, so no runtime probe.
#include "flowtox/simd/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flowtox::simd::neon {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

double sum(std::span<const double> x) {
    const double* p = x.data();
    const std::size_t n = x.size();
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(p + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += p[i];
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

CentralSums central_sums(std::span<const double> x, double center) {
    const std::size_t n = x.size();
    const float64x2_t c = vdupq_n_f64(center);
    float64x2_t s2 = vdupq_n_f64(0.0);
    float64x2_t s3 = vdupq_n_f64(0.0);
    float64x2_t s4 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x.data() + i), c);
        const float64x2_t d2 = vmulq_f64(d, d);
        s2 = vaddq_f64(s2, d2);
        s3 = vfmaq_f64(s3, d2, d);
        s4 = vfmaq_f64(s4, d2, d2);
    }
    CentralSums out{vaddvq_f64(s2), vaddvq_f64(s3), vaddvq_f64(s4)};
    for (; i < n; ++i) {
        const double d = x[i] - center;
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
    const float64x2_t k = vdupq_n_f64(kInvSqrt2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // de-interleave x0 x2 / x1 x3
        const float64x2x2_t v = vld2q_f64(in.data() + 2 * i);
        vst1q_f64(approx.data() + i, vmulq_f64(vaddq_f64(v.val[0], v.val[1]), k));
        vst1q_f64(detail.data() + i, vmulq_f64(vsubq_f64(v.val[0], v.val[1]), k));
    }
    for (; i < n; ++i) {
        const double a = in[2 * i];
        const double b = in[2 * i + 1];
        approx[i] = (a + b) * kInvSqrt2;
        detail[i] = (a - b) * kInvSqrt2;
    }
}

void haar_inverse(std::span<const double> approx, std::span<const double> detail,
                  std::span<double> out) {
    const std::size_t n = approx.size();
    const float64x2_t k = vdupq_n_f64(kInvSqrt2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t a = vld1q_f64(approx.data() + i);
        const float64x2_t d = vld1q_f64(detail.data() + i);
        float64x2x2_t v;
        v.val[0] = vmulq_f64(vaddq_f64(a, d), k);
        v.val[1] = vmulq_f64(vsubq_f64(a, d), k);
        vst2q_f64(out.data() + 2 * i, v);
    }
    for (; i < n; ++i) {
        out[2 * i] = (approx[i] + detail[i]) * kInvSqrt2;
        out[2 * i + 1] = (approx[i] - detail[i]) * kInvSqrt2;
    }
}

void soft_threshold(std::span<double> x, double thr) {
    const std::size_t n = x.size();
    const float64x2_t t = vdupq_n_f64(thr);
    const float64x2_t zero = vdupq_n_f64(0.0);
    const uint64x2_t sign = vdupq_n_u64(0x8000000000000000ULL);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(x.data() + i);
        const float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(v), t), zero);
        const uint64x2_t bits =
            vorrq_u64(vreinterpretq_u64_f64(mag), vandq_u64(vreinterpretq_u64_f64(v), sign));
        vst1q_f64(x.data() + i, vreinterpretq_f64_u64(bits));
    }
    for (; i < n; ++i) x[i] = std::copysign(std::max(std::abs(x[i]) - thr, 0.0), x[i]);
}

}  // namespace

const KernelTable table{
    Isa::Neon,      &sum,          &dot,         &squared_distance, &sum_abs_diff,
    &central_sums,  &haar_forward, &haar_inverse, &soft_threshold,
};

}  // namespace flowtox::simd::neon
