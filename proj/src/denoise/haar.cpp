#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "flowtox/denoise.hpp"
#include "flowtox/error.hpp"
#include "flowtox/simd/kernels.hpp"

namespace flowtox::denoise {

std::size_t max_level(std::size_t n) {
    std::size_t l = 0;
    while ((std::size_t{2} << l) <= n) ++l;
    return l;
}

WaveletDecomposition haar_dwt(std::span<const double> signal, std::size_t level) {
    if (level == 0) throw std::invalid_argument("haar_dwt: level must be >= 1");
    if (level > max_level(signal.size())) {
        throw std::invalid_argument("haar_dwt: level " + std::to_string(level) +
                                    " too deep for length " + std::to_string(signal.size()));
    }
    WaveletDecomposition dec;
    dec.level = level;
    dec.original_length = signal.size();
    std::vector<double> cur(signal.begin(), signal.end());
    for (std::size_t k = 0; k < level; ++k) {
        const bool pad = cur.size() % 2 == 1;
        if (pad) cur.push_back(cur.back());
        const std::size_t half = cur.size() / 2;
        std::vector<double> approx(half);
        std::vector<double> detail(half);
        simd::haar_forward(cur, approx, detail);
        dec.details.push_back(std::move(detail));
        dec.padded.push_back(pad);
        cur = std::move(approx);
    }
    dec.approximation = std::move(cur);
    return dec;
}

std::vector<double> haar_idwt(const WaveletDecomposition& dec) {
    if (dec.level == 0 || dec.details.size() != dec.level || dec.padded.size() != dec.level) {
        throw std::invalid_argument("haar_idwt: level does not match stored coefficients");
    }
    std::vector<double> cur = dec.approximation;
    for (std::size_t k = dec.level; k-- > 0;) {
        const auto& d = dec.details[k];
        if (d.size() != cur.size()) {
            throw std::invalid_argument("haar_idwt: inconsistent coefficient lengths at level " +
                                        std::to_string(k + 1));
        }
        std::vector<double> out(2 * cur.size());
        simd::haar_inverse(cur, d, out);
        if (dec.padded[k]) out.pop_back();
        const std::size_t expected = k > 0 ? dec.details[k - 1].size() : dec.original_length;
        if (out.size() != expected) {
            throw std::invalid_argument("haar_idwt: inconsistent coefficient lengths at level " +
                                        std::to_string(k + 1));
        }
        cur = std::move(out);
    }
    return cur;
}

WaveletDecomposition soft_threshold(WaveletDecomposition dec, double thr) {
    if (!(thr >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be non-negative");
    if (thr == 0.0) return dec;
    for (auto& d : dec.details) simd::soft_threshold(d, thr);
    return dec;
}

double universal_threshold(const WaveletDecomposition& dec, ThresholdMode mode) {
    if (dec.details.empty() || dec.details.front().empty()) {
        throw std::invalid_argument("universal_threshold: no detail coefficients");
    }
    const double n = static_cast<double>(std::max<std::size_t>(dec.original_length, 2));
    const double base = std::sqrt(2.0 * std::log(n));
    if (mode == ThresholdMode::Unscaled) return base;
    std::vector<double> a(dec.details.front().size());
    std::transform(dec.details.front().begin(), dec.details.front().end(), a.begin(),
                   [](double v) { return std::abs(v); });
    std::sort(a.begin(), a.end());
    const std::size_t m = a.size();
    const double med = m % 2 == 1 ? a[m / 2] : 0.5 * (a[m / 2 - 1] + a[m / 2]);
    return med / 0.6745 * base;
}

DenoiseResult denoise(std::span<const double> signal, std::size_t level, ThresholdMode mode) {
    if (signal.size() < 2) throw DataError("denoise: need at least 2 samples");
    if (level == 0) throw std::invalid_argument("denoise: level must be >= 1");
    DenoiseResult res;
    const std::size_t cap = max_level(signal.size());
    res.level_capped = level > cap;
    res.level = std::min(level, cap);
    auto dec = haar_dwt(signal, res.level);
    res.threshold = universal_threshold(dec, mode);
    res.signal = haar_idwt(soft_threshold(std::move(dec), res.threshold));
    return res;
}

DenoiseSummary summarize(std::span<const double> before, std::span<const double> after) {
    if (before.size() != after.size() || before.empty()) {
        throw std::invalid_argument("summarize: series must be non-empty and equal length");
    }
    const auto var = [](std::span<const double> x) {
        const double n = static_cast<double>(x.size());
        const double m = simd::sum(x) / n;
        return simd::central_sums(x, m).m2 / n;
    };
    DenoiseSummary s;
    s.variance_before = var(before);
    s.variance_after = var(after);
    s.mse = simd::squared_distance(before, after) / static_cast<double>(before.size());
    return s;
}

}  // namespace flowtox::denoise
