#include "flowtox/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace flowtox::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FLOWTOX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* table_ptr(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return &scalar::table;
        case Isa::Avx2:
#if defined(FLOWTOX_HAVE_AVX2)
            return cpu_has_avx2() ? &avx2::table : nullptr;
#else
            return nullptr;
#endif
        case Isa::Neon:
#if defined(FLOWTOX_HAVE_NEON)
            return &neon::table;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* select_initial() noexcept {
    if (const char* env = std::getenv("FLOWTOX_SIMD")) {
        const std::string want(env);
        const Isa isa = want == "avx2"   ? Isa::Avx2
                        : want == "neon" ? Isa::Neon
                                         : Isa::Scalar;
        if (const KernelTable* t = table_ptr(isa)) return t;
        return &scalar::table;
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (const KernelTable* t = table_ptr(isa)) return t;
    }
    return &scalar::table;
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> ptr{select_initial()};
    return ptr;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept { return table_ptr(isa) != nullptr; }

const KernelTable& kernels_for(Isa isa) {
    const KernelTable* t = table_ptr(isa);
    if (t == nullptr) {
        throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
    }
    return *t;
}

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

Isa active_isa() noexcept { return kernels().isa; }

void set_active_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_relaxed); }

}  // namespace flowtox::simd
