#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flowtox::denoise {

/// Multi-level orthonormal Haar decomposition.
struct WaveletDecomposition {
    std::size_t level = 0;
    std::vector<double> approximation;          ///< coarsest level
    std::vector<std::vector<double>> details;   ///< details[k] belongs to level k + 1
    std::size_t original_length = 0;
    /// padded[k] is true when the input to level k + 1 had odd length and was
    /// extended by repeating its last sample.
    std::vector<bool> padded;
};

/// Deepest level allowed for a signal of length n: floor(log2 n).
[[nodiscard]] std::size_t max_level(std::size_t n);

/// Throws std::invalid_argument when level is 0 or 2^level exceeds the length.
[[nodiscard]] WaveletDecomposition haar_dwt(std::span<const double> signal, std::size_t level);

/// Exact inverse of haar_dwt; padding is removed. Throws std::invalid_argument
/// on inconsistent coefficient lengths.
[[nodiscard]] std::vector<double> haar_idwt(const WaveletDecomposition& dec);

/// sign(d) * max(|d| - thr, 0) on every detail coefficient.
[[nodiscard]] WaveletDecomposition soft_threshold(WaveletDecomposition dec, double thr);

enum class ThresholdMode {
    Unscaled,  ///< sqrt(2 ln N), unit noise scale
    Estimated  ///< sigma_hat * sqrt(2 ln N), sigma_hat = median|d_1| / 0.6745
};

[[nodiscard]] double universal_threshold(const WaveletDecomposition& dec, ThresholdMode mode);

struct DenoiseResult {
    std::vector<double> signal;
    std::size_t level = 0;
    bool level_capped = false;  ///< requested level exceeded floor(log2 N)
    double threshold = 0.0;
};

/// Decompose, soft-threshold at the universal threshold and reconstruct.
[[nodiscard]] DenoiseResult denoise(std::span<const double> signal, std::size_t level = 6,
                                    ThresholdMode mode = ThresholdMode::Estimated);

struct DenoiseSummary {
    double variance_before = 0.0;
    double variance_after = 0.0;
    double mse = 0.0;  ///< mean squared difference between the two series
};

[[nodiscard]] DenoiseSummary summarize(std::span<const double> before, std::span<const double> after);

}  // namespace flowtox::denoise
