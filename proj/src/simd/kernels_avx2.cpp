// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "flowtox/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flowtox::simd::avx2 {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double sum(std::span<const double> x) {
    const double* p = x.data();
    const std::size_t n = x.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += p[i];
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += pa[i] * pb[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = pa[i] - pb[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(
            acc, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i))));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::abs(pa[i] - pb[i]);
    return s;
}

CentralSums central_sums(std::span<const double> x, double center) {
    const double* p = x.data();
    const std::size_t n = x.size();
    const __m256d c = _mm256_set1_pd(center);
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    __m256d s4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
        const __m256d d2 = _mm256_mul_pd(d, d);
        s2 = _mm256_add_pd(s2, d2);
        s3 = _mm256_fmadd_pd(d2, d, s3);
        s4 = _mm256_fmadd_pd(d2, d2, s4);
    }
    CentralSums out{hsum(s2), hsum(s3), hsum(s4)};
    for (; i < n; ++i) {
        const double d = p[i] - center;
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
    const double* p = in.data();
    const __m256d k = _mm256_set1_pd(kInvSqrt2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d lo = _mm256_loadu_pd(p + 2 * i);      // x0 x1 x2 x3
        const __m256d hi = _mm256_loadu_pd(p + 2 * i + 4);  // x4 x5 x6 x7
        // hadd -> [x0+x1, x4+x5, x2+x3, x6+x7]; reorder lanes to 0,2,1,3.
        const __m256d s = _mm256_permute4x64_pd(_mm256_hadd_pd(lo, hi), 0xD8);
        const __m256d d = _mm256_permute4x64_pd(_mm256_hsub_pd(lo, hi), 0xD8);
        _mm256_storeu_pd(approx.data() + i, _mm256_mul_pd(s, k));
        _mm256_storeu_pd(detail.data() + i, _mm256_mul_pd(d, k));
    }
    for (; i < n; ++i) {
        const double a = p[2 * i];
        const double b = p[2 * i + 1];
        approx[i] = (a + b) * kInvSqrt2;
        detail[i] = (a - b) * kInvSqrt2;
    }
}

void haar_inverse(std::span<const double> approx, std::span<const double> detail,
                  std::span<double> out) {
    const std::size_t n = approx.size();
    const __m256d k = _mm256_set1_pd(kInvSqrt2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(approx.data() + i);
        const __m256d d = _mm256_loadu_pd(detail.data() + i);
        const __m256d even = _mm256_mul_pd(_mm256_add_pd(a, d), k);
        const __m256d odd = _mm256_mul_pd(_mm256_sub_pd(a, d), k);
        const __m256d lo = _mm256_unpacklo_pd(even, odd);  // e0 o0 e2 o2
        const __m256d hi = _mm256_unpackhi_pd(even, odd);  // e1 o1 e3 o3
        _mm256_storeu_pd(out.data() + 2 * i, _mm256_permute2f128_pd(lo, hi, 0x20));
        _mm256_storeu_pd(out.data() + 2 * i + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
    }
    for (; i < n; ++i) {
        out[2 * i] = (approx[i] + detail[i]) * kInvSqrt2;
        out[2 * i + 1] = (approx[i] - detail[i]) * kInvSqrt2;
    }
}

void soft_threshold(std::span<double> x, double thr) {
    double* p = x.data();
    const std::size_t n = x.size();
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d t = _mm256_set1_pd(thr);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(p + i);
        const __m256d mag = _mm256_max_pd(_mm256_sub_pd(abs_pd(v), t), zero);
        _mm256_storeu_pd(p + i, _mm256_or_pd(mag, _mm256_and_pd(v, sign_mask)));
    }
    for (; i < n; ++i) p[i] = std::copysign(std::max(std::abs(p[i]) - thr, 0.0), p[i]);
}

}  // namespace

const KernelTable table{
    Isa::Avx2,      &sum,          &dot,         &squared_distance, &sum_abs_diff,
    &central_sums,  &haar_forward, &haar_inverse, &soft_threshold,
};

}  // namespace flowtox::simd::avx2
