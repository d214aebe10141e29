#include <doctest.h>

#include "mmdlp/raster.hpp"
#include "mmdlp/shapes.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace mmdlp;

namespace {

Contour rect(double x0, double y0, double x1, double y1) { return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}; }

LayerSlice slice_of(std::vector<Contour> cs)
{
    LayerSlice s;
    s.material = "resin";
    s.group.assign(cs.size(), 0);
    s.contours = std::move(cs);
    return s;
}

// Pitch 31.25 um keeps every center and edge exactly representable.
constexpr double kExactPitch = 31.25;
constexpr double kP = kExactPitch / 1000.0;

} // namespace

TEST_CASE("square over 10 x 10 centers")
{
    const GridSpec g{32, 32, 20.0, {0.01, 0.01}};
    const MaskBitmap m = rasterize(slice_of({rect(0, 0, 0.2, 0.2)}), g);
    CHECK(m.count() == 100);
    for (std::uint32_t j = 0; j < 10; ++j)
        for (std::uint32_t i = 0; i < 10; ++i)
            CHECK(m.get(i, j));
    CHECK(mask_area(m) == doctest::Approx(0.04));
}

TEST_CASE("40 um line on a 20 um grid")
{
    const GridSpec g{100, 100, 20.0, {0.01, 0.01}};
    const auto contours = std::vector<Contour>{rect(0.2, 0.2, 0.24, 1.2)};
    const MaskBitmap m = rasterize(slice_of(contours), g);
    CHECK(m == oracle::raster(contours, g));
    const auto comps = oracle::components(m);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].size() == 100);
    std::uint32_t imin = 1000, imax = 0, jmin = 1000, jmax = 0;
    for (auto [i, j] : comps[0]) {
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
    }
    CHECK(imax - imin + 1 == 2);
    CHECK(jmax - jmin + 1 == 50);
}

TEST_CASE("empty slice gives an empty mask")
{
    const GridSpec g{70, 3, 10.0, {0, 0}};
    const MaskBitmap m = rasterize(slice_of({}), g);
    CHECK(m.empty());
    CHECK(mask_area(m) == 0.0);
}

TEST_CASE("half-open rule on edge-aligned squares")
{
    const GridSpec g{16, 16, kExactPitch, {0, 0}};
    // Edges run exactly through pixel centers 2 and 4.
    const MaskBitmap left = rasterize(slice_of({rect(2 * kP, 2 * kP, 4 * kP, 4 * kP)}), g);
    CHECK(left.count() == 4);
    CHECK(left.get(2, 2));
    CHECK(left.get(3, 3));
    CHECK_FALSE(left.get(4, 2));
    CHECK_FALSE(left.get(2, 4));

    // Tiling neighbours never share a pixel and leave no gap.
    const MaskBitmap right = rasterize(slice_of({rect(4 * kP, 2 * kP, 6 * kP, 4 * kP)}), g);
    const MaskBitmap above = rasterize(slice_of({rect(2 * kP, 4 * kP, 4 * kP, 6 * kP)}), g);
    CHECK(overlap_pixels(left, right) == 0);
    CHECK(overlap_pixels(left, above) == 0);
    const MaskBitmap both = rasterize(slice_of({rect(2 * kP, 2 * kP, 6 * kP, 4 * kP)}), g);
    MaskBitmap merged = left;
    merged.merge(right);
    CHECK(merged == both);
}

TEST_CASE("disjoint polygons have an empty AND")
{
    const GridSpec g{200, 200, 10.0, {0.005, 0.005}};
    const MaskBitmap a = rasterize(slice_of({rect(0.1, 0.1, 0.9, 1.5)}), g);
    const MaskBitmap b = rasterize(slice_of({rect(0.9, 0.1, 1.7, 1.5)}), g);
    CHECK(a.count() > 0);
    CHECK(b.count() > 0);
    CHECK(overlap_pixels(a, b) == 0);
}

TEST_CASE("translation by whole pixels shifts the mask")
{
    const GridSpec g{130, 90, kExactPitch, {0, 0}};
    const std::vector<Contour> tri{{{{0.3, 0.2}, {1.7, 0.6}, {0.9, 1.9}}}};
    std::vector<Contour> moved = tri;
    for (auto& p : moved[0].points) {
        p.x += 5 * kP;
        p.y += 3 * kP;
    }
    const MaskBitmap a = rasterize(slice_of(tri), g);
    const MaskBitmap b = rasterize(slice_of(moved), g);
    CHECK(a.count() == b.count());
    for (std::uint32_t j = 0; j + 3 < g.height_px; ++j)
        for (std::uint32_t i = 0; i + 5 < g.width_px; ++i)
            REQUIRE(a.get(i, j) == b.get(i + 5, j + 3));
}

TEST_CASE("randomized polygons agree with the crossing-count oracle")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const GridSpec g{std::uint32_t(20 + rng() % 90), std::uint32_t(20 + rng() % 90), 5 + 45 * u(rng),
                         {u(rng) - 0.5, u(rng) - 0.5}};
        const double w = g.width_px * g.pitch_mm(), h = g.height_px * g.pitch_mm();
        std::vector<Contour> cs(1 + rng() % 2);
        for (auto& c : cs) {
            const std::size_t n = 3 + rng() % 18;
            for (std::size_t k = 0; k < n; ++k)
                c.points.push_back({g.origin_mm.x - 0.1 * w + 1.2 * w * u(rng), g.origin_mm.y - 0.1 * h + 1.2 * h * u(rng)});
        }
        const MaskBitmap m = rasterize(slice_of(cs), g);
        for (std::uint32_t j = 0; j < g.height_px; ++j)
            for (std::uint32_t i = 0; i < g.width_px; ++i) {
                const double x = g.center_x(i), y = g.center_y(j);
                if (oracle::edge_distance(cs, x, y) <= 1e-6)
                    continue;
                REQUIRE(m.get(i, j) == oracle::inside_even_odd(cs, x, y));
            }
    }
}

TEST_CASE("icosphere equator raster area")
{
    const TriangleMesh s = shapes::icosphere({0, 0, 0}, 10, 4);
    const auto cs = slice_at(s, {}, 0.0);
    const double pitch = 0.05;
    const GridSpec g = centered_grid(440, 440, pitch * 1000, 0, 0);
    RasterStats st;
    const MaskBitmap m = rasterize(slice_of(cs), g, &st);
    CHECK(st.clipped_pixels == 0);
    double perimeter = 0;
    for (const auto& c : cs)
        perimeter += c.perimeter();
    CHECK(std::abs(mask_area(m) - even_odd_area(cs)) <= 2 * perimeter * pitch);
}

TEST_CASE("pixels outside the grid are clipped and counted")
{
    const GridSpec g{10, 10, 100.0, {0.05, 0.05}};
    RasterStats st;
    const MaskBitmap m = rasterize(slice_of({rect(0.5, 0.5, 1.5, 1.0)}), g, &st);
    CHECK(m.count() == 25);
    CHECK(st.clipped_pixels == 25);
}

TEST_CASE("PBM encoding is bit exact")
{
    const GridSpec g{10, 2, 20.0, {0, 0}};
    MaskBitmap m(g);
    m.set(0, 0);
    m.set(9, 0);
    m.set(1, 1);
    m.set(8, 1);
    const std::string pbm = encode_pbm(m);
    const std::string expected = std::string("P4\n10 2\n") + char(0x80) + char(0x40) + char(0x40) + char(0x80);
    CHECK(pbm == expected);
    CHECK(decode_pbm(pbm, 20.0) == m);
}

TEST_CASE("PBM file round trip")
{
    const auto dir = oracle::temp_dir("pbm");
    const GridSpec g{77, 13, 47.25, {1, 2}};
    MaskBitmap m(g);
    for (std::uint32_t j = 0; j < 13; ++j)
        for (std::uint32_t i = 0; i < 77; ++i)
            if ((i * 7 + j * 3) % 5 == 0)
                m.set(i, j);
    const auto path = dir / mask_filename(3, "resin");
    CHECK(path.filename() == "layer00003_resin.pbm");
    write_mask(m, path);
    CHECK(read_mask(path, 47.25, {1, 2}) == m);
}
