#include <doctest.h>

#include "mmdlp/raster.hpp"
#include "mmdlp/simd/bitops.hpp"

#include <random>
#include <vector>

using namespace mmdlp;

namespace {

std::vector<const simd::BitKernels*> available()
{
    std::vector<const simd::BitKernels*> out;
    for (simd::Isa isa : {simd::Isa::Scalar, simd::Isa::Avx2, simd::Isa::Neon})
        if (const auto* k = simd::kernels_for(isa))
            out.push_back(k);
    return out;
}

struct IsaGuard {
    simd::Isa saved = simd::active_isa();
    ~IsaGuard() { simd::set_active_isa(saved); }
};

} // namespace

TEST_CASE("scalar kernels are always available")
{
    CHECK(simd::kernels_for(simd::Isa::Scalar) == &simd::scalar_kernels());
    CHECK(simd::kernels_for(simd::detect_isa()) != nullptr);
}

TEST_CASE("every available kernel matches the scalar reference")
{
    std::mt19937_64 rng(7);
    const auto& ref = simd::scalar_kernels();
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 64, 127, 1000}) {
        for (int density = 0; density < 3; ++density) {
            std::vector<std::uint64_t> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = density == 0 ? 0 : density == 1 ? rng() : ~std::uint64_t(0);
                b[i] = rng() & rng();
            }
            for (const auto* k : available()) {
                CHECK(k->popcount(a.data(), n) == ref.popcount(a.data(), n));
                CHECK(k->and_popcount(a.data(), b.data(), n) == ref.and_popcount(a.data(), b.data(), n));
                std::vector<std::uint64_t> d1 = b, d2 = b;
                k->or_into(d1.data(), a.data(), n);
                ref.or_into(d2.data(), a.data(), n);
                CHECK(d1 == d2);
            }
        }
    }
}

TEST_CASE("mask operations agree across ISAs")
{
    IsaGuard guard;
    const GridSpec g{1001, 37, 10.0, {0, 0}};
    MaskBitmap a(g), b(g);
    std::mt19937 rng(3);
    for (std::uint32_t j = 0; j < g.height_px; ++j)
        for (std::uint32_t i = 0; i < g.width_px; ++i) {
            if (rng() % 3 == 0)
                a.set(i, j);
            if (rng() % 5 == 0)
                b.set(i, j);
        }
    REQUIRE(simd::set_active_isa(simd::Isa::Scalar));
    const auto ca = a.count(), ov = overlap_pixels(a, b);
    MaskBitmap m = a;
    m.merge(b);
    for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Neon}) {
        if (!simd::set_active_isa(isa))
            continue;
        CHECK(a.count() == ca);
        CHECK(overlap_pixels(a, b) == ov);
        MaskBitmap m2 = a;
        m2.merge(b);
        CHECK(m2 == m);
    }
}

TEST_CASE("fill_span sets exactly the requested bits")
{
    for (std::size_t begin = 0; begin < 200; begin += 13)
        for (std::size_t end = begin; end <= 200; end += 7) {
            std::vector<std::uint64_t> row(4, 0);
            simd::fill_span(row.data(), begin, end);
            for (std::size_t i = 0; i < 256; ++i)
                REQUIRE(bool((row[i / 64] >> (i % 64)) & 1) == (i >= begin && i < end));
        }
}
