#pragma once

// Data-parallel inner loops shared by the signal modules.
//
// Every kernel has a scalar reference implementation; AVX2 (x86-64) and NEON
// (aarch64) variants are compiled when the toolchain supports them and picked
// at runtime. Elementwise kernels are bit-identical to the scalar reference;
// reductions agree up to summation order.
//
// Set FLOWTOX_SIMD=scalar|avx2|neon to pin the variant (useful for
// reproducing results across machines).

#include <cstddef>
#include <span>
#include <string_view>

namespace flowtox::simd {

enum class Isa { Scalar, Avx2, Neon };

struct CentralSums {
    double m2 = 0.0;  ///< Σ (x - c)^2
    double m3 = 0.0;  ///< Σ (x - c)^3
    double m4 = 0.0;  ///< Σ (x - c)^4
};

/// Function table for one instruction-set variant. All spans passed to a
/// binary kernel must have equal length; the haar steps take an input of
/// length 2n and outputs of length n.
struct KernelTable {
    Isa isa;
    double (*sum)(std::span<const double> x);
    double (*dot)(std::span<const double> a, std::span<const double> b);
    double (*squared_distance)(std::span<const double> a, std::span<const double> b);
    double (*sum_abs_diff)(std::span<const double> a, std::span<const double> b);
    CentralSums (*central_sums)(std::span<const double> x, double center);
    void (*haar_forward)(std::span<const double> in, std::span<double> approx,
                         std::span<double> detail);
    void (*haar_inverse)(std::span<const double> approx, std::span<const double> detail,
                         std::span<double> out);
    void (*soft_threshold)(std::span<double> x, double thr);
};

[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;

/// True when the variant was compiled in and the running CPU supports it.
[[nodiscard]] bool isa_available(Isa isa) noexcept;

/// Table for a specific variant; throws std::invalid_argument if unavailable.
[[nodiscard]] const KernelTable& kernels_for(Isa isa);

/// Table selected at first use (best available, or FLOWTOX_SIMD override).
[[nodiscard]] const KernelTable& kernels() noexcept;

[[nodiscard]] Isa active_isa() noexcept;

/// Pin the active variant for the rest of the process.
void set_active_isa(Isa isa);

// Convenience wrappers over the active table.
[[nodiscard]] inline double sum(std::span<const double> x) { return kernels().sum(x); }
[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
    return kernels().dot(a, b);
}
[[nodiscard]] inline double squared_distance(std::span<const double> a,
                                             std::span<const double> b) {
    return kernels().squared_distance(a, b);
}
[[nodiscard]] inline double sum_abs_diff(std::span<const double> a,
                                         std::span<const double> b) {
    return kernels().sum_abs_diff(a, b);
}
[[nodiscard]] inline CentralSums central_sums(std::span<const double> x, double center) {
    return kernels().central_sums(x, center);
}
inline void haar_forward(std::span<const double> in, std::span<double> approx,
                         std::span<double> detail) {
    kernels().haar_forward(in, approx, detail);
}
inline void haar_inverse(std::span<const double> approx, std::span<const double> detail,
                         std::span<double> out) {
    kernels().haar_inverse(approx, detail, out);
}
inline void soft_threshold(std::span<double> x, double thr) { kernels().soft_threshold(x, thr); }

namespace scalar {
extern const KernelTable table;
}
#if defined(FLOWTOX_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif
#if defined(FLOWTOX_HAVE_NEON)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace flowtox::simd
