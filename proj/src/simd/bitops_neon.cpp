#include "mmdlp/simd/bitops.hpp"

#include <arm_neon.h>

namespace mmdlp::simd {

namespace {

std::uint64_t popcount_neon(const std::uint64_t* a, std::size_t n)
{
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint8x16_t v = vreinterpretq_u8_u64(vld1q_u64(a + i));
        c += vaddlvq_u8(vcntq_u8(v));
    }
    for (; i < n; ++i)
        c += static_cast<std::uint64_t>(__builtin_popcountll(a[i]));
    return c;
}

std::uint64_t and_popcount_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n)
{
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t v = vandq_u64(vld1q_u64(a + i), vld1q_u64(b + i));
        c += vaddlvq_u8(vcntq_u8(vreinterpretq_u8_u64(v)));
    }
    for (; i < n; ++i)
        c += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i]));
    return c;
}

void or_into_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_u64(dst + i, vorrq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
    for (; i < n; ++i)
        dst[i] |= src[i];
}

const BitKernels kNeon{popcount_neon, and_popcount_neon, or_into_neon};

} // namespace

const BitKernels& neon_kernels() { return kNeon; }

} // namespace mmdlp::simd
