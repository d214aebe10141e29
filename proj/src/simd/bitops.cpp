#include "mmdlp/simd/bitops.hpp"

#include <atomic>
#include <bit>

namespace mmdlp::simd {

#if defined(MMDLP_HAVE_AVX2)
const BitKernels& avx2_kernels();
#endif
#if defined(MMDLP_HAVE_NEON)
const BitKernels& neon_kernels();
#endif

namespace {

std::uint64_t popcount_scalar(const std::uint64_t* a, std::size_t n)
{
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        c += static_cast<std::uint64_t>(std::popcount(a[i]));
    return c;
}

std::uint64_t and_popcount_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n)
{
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
        c += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    return c;
}

void or_into_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        dst[i] |= src[i];
}

const BitKernels kScalar{popcount_scalar, and_popcount_scalar, or_into_scalar};

bool cpu_has(Isa isa)
{
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(MMDLP_HAVE_AVX2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
        return false;
#endif
    case Isa::Neon:
#if defined(MMDLP_HAVE_NEON)
        return true; // mandatory on AArch64
#else
        return false;
#endif
    }
    return false;
}

std::atomic<const BitKernels*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::Scalar};

} // namespace

std::string_view to_string(Isa isa)
{
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "?";
}

const BitKernels& scalar_kernels() { return kScalar; }

const BitKernels* kernels_for(Isa isa)
{
    if (!cpu_has(isa))
        return nullptr;
    switch (isa) {
    case Isa::Scalar: return &kScalar;
#if defined(MMDLP_HAVE_AVX2)
    case Isa::Avx2: return &avx2_kernels();
#endif
#if defined(MMDLP_HAVE_NEON)
    case Isa::Neon: return &neon_kernels();
#endif
    default: return nullptr;
    }
}

Isa detect_isa()
{
    if (cpu_has(Isa::Avx2))
        return Isa::Avx2;
    if (cpu_has(Isa::Neon))
        return Isa::Neon;
    return Isa::Scalar;
}

const BitKernels& active_kernels()
{
    const BitKernels* k = g_active.load(std::memory_order_acquire);
    if (!k) {
        const Isa isa = detect_isa();
        k = kernels_for(isa);
        g_active_isa.store(isa);
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

Isa active_isa()
{
    active_kernels();
    return g_active_isa.load();
}

bool set_active_isa(Isa isa)
{
    const BitKernels* k = kernels_for(isa);
    if (!k)
        return false;
    g_active_isa.store(isa);
    g_active.store(k, std::memory_order_release);
    return true;
}

void fill_span(std::uint64_t* row, std::size_t begin, std::size_t end)
{
    if (begin >= end)
        return;
    const std::size_t w0 = begin / 64, w1 = (end - 1) / 64;
    const std::uint64_t head = ~std::uint64_t(0) << (begin % 64);
    const std::uint64_t tail = ~std::uint64_t(0) >> (63 - (end - 1) % 64);
    if (w0 == w1) {
        row[w0] |= head & tail;
        return;
    }
    row[w0] |= head;
    for (std::size_t w = w0 + 1; w < w1; ++w)
        row[w] = ~std::uint64_t(0);
    row[w1] |= tail;
}

} // namespace mmdlp::simd
