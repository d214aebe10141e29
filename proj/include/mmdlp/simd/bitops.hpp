#pragma once

// Word-level kernels over packed 1-bit rows. The scalar versions are the
// reference; SIMD variants must produce identical results and are selected
// once at startup from the CPU's capabilities.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace mmdlp::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct BitKernels {
    std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t n);
    std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
    void (*or_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
};

// Reference implementations, always available.
const BitKernels& scalar_kernels();

// nullptr when the ISA is not compiled in or not supported by this CPU.
const BitKernels* kernels_for(Isa isa);

// Best supported ISA on this machine.
Isa detect_isa();

// Kernels used by the library. Defaults to detect_isa(); tests may pin it.
const BitKernels& active_kernels();
Isa active_isa();
bool set_active_isa(Isa isa);

inline std::uint64_t popcount(std::span<const std::uint64_t> a) { return active_kernels().popcount(a.data(), a.size()); }

inline std::uint64_t and_popcount(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b)
{
    return active_kernels().and_popcount(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void or_into(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src)
{
    active_kernels().or_into(dst.data(), src.data(), dst.size() < src.size() ? dst.size() : src.size());
}

// Sets bits [begin, end) of a row (bit i lives in word i / 64 at position i % 64).
void fill_span(std::uint64_t* row, std::size_t begin, std::size_t end);

} // namespace mmdlp::simd
