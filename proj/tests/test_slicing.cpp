#include <doctest.h>

#include "mmdlp/error.hpp"
#include "mmdlp/shapes.hpp"
#include "mmdlp/raster.hpp"
#include "mmdlp/slicing.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace mmdlp;

TEST_CASE("unit cube cross-section")
{
    const TriangleMesh cube = shapes::box({0, 0, 0}, {1, 1, 1});
    const auto contours = slice_at(cube, {}, 0.5);
    REQUIRE(contours.size() == 1);
    CHECK(even_odd_area(contours) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(contours[0].perimeter() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(slice_at(cube, {}, 2.0).empty());
}

TEST_CASE("plane through vertices is shifted")
{
    const TriangleMesh cube = shapes::box({0, 0, 0}, {1, 1, 1});
    const auto top = slice_at(cube, {}, 1.0);
    CHECK(top.empty());
    const auto bottom = slice_at(cube, {}, 0.0);
    REQUIRE(bottom.size() == 1);
    CHECK(even_odd_area(bottom) == doctest::Approx(1.0));
}

TEST_CASE("icosphere section at z = 6")
{
    const TriangleMesh s = shapes::icosphere({0, 0, 0}, 10, 4);
    const auto contours = slice_at(s, {}, 6.0);
    REQUIRE(contours.size() == 1);
    const double area = even_odd_area(contours);
    // Independent per-triangle Green's sum agrees with the stitched contour.
    CHECK(area == doctest::Approx(oracle::section_area(s, 6.0)).epsilon(1e-9));
    CHECK(std::abs(area - std::numbers::pi * 64) / (std::numbers::pi * 64) < 0.01);
}

TEST_CASE("slice area matches a point sampling oracle")
{
    const TriangleMesh s = shapes::icosphere({0.3, -0.2, 0}, 10, 3);
    const auto contours = slice_at(s, {}, -3.7);
    const double h = 0.05;
    std::size_t in = 0;
    for (double y = -10 + h / 2; y < 10; y += h)
        for (double x = -10 + h / 2; x < 10; x += h)
            in += oracle::inside_even_odd(contours, x, y);
    const double sampled = double(in) * h * h;
    CHECK(std::abs(sampled - even_odd_area(contours)) < 2 * contours[0].perimeter() * h);
}

TEST_CASE("layer stacks")
{
    SUBCASE("single cube")
    {
        const Assembly a = oracle::assembly({{shapes::box({0, 0, 0}, {1, 1, 1}), "resin"}}, 0.1);
        const LayerStack st = build_layer_stack(a);
        REQUIRE(st.layers.size() == 10);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(st.layers[k].index == k);
            CHECK(st.layers[k].z == doctest::Approx((k + 0.5) * 0.1));
            REQUIRE(st.layers[k].slices.size() == 1);
            CHECK(st.layers[k].slices[0].material == "resin");
        }
    }
    SUBCASE("stacked")
    {
        const Assembly a = oracle::assembly(
            {{shapes::box({0, 0, 0}, {1, 1, 1}), "resin"}, {shapes::box({0, 0, 1}, {1, 1, 2}), "precursor"}}, 0.1);
        const LayerStack st = build_layer_stack(a);
        REQUIRE(st.layers.size() == 20);
        for (std::size_t k = 0; k < 20; ++k) {
            REQUIRE(st.layers[k].slices.size() == 1);
            CHECK(st.layers[k].slices[0].material == (k < 10 ? "resin" : "precursor"));
        }
    }
    SUBCASE("nested")
    {
        const Assembly a = oracle::assembly({{shapes::square_tube(0, 0, 1, 2, 0, 1), "resin"},
                                             {shapes::square_tube(0, 0, 0.5, 1, 0, 1), "precursor"}},
                                            0.1);
        const LayerStack st = build_layer_stack(a);
        REQUIRE(st.layers.size() == 10);
        for (const auto& l : st.layers) {
            REQUIRE(l.slices.size() == 2);
            CHECK(l.find("resin"));
            CHECK(l.find("precursor"));
            CHECK(l.find("resin")->area() == doctest::Approx(12.0));
            CHECK(l.find("precursor")->area() == doctest::Approx(3.0));
        }
    }
}

TEST_CASE("units of one material union")
{
    // Two overlapping cubes of the same material: the overlap must not cancel.
    const Assembly a = oracle::assembly(
        {{shapes::box({0, 0, 0}, {2, 2, 1}), "resin"}, {shapes::box({1, 1, 0}, {3, 3, 1}), "resin"}}, 0.5);
    const LayerStack st = build_layer_stack(a);
    REQUIRE(st.layers.size() == 2);
    const LayerSlice* s = st.layers[0].find("resin");
    REQUIRE(s);
    CHECK(s->contours.size() == 2);
    CHECK(s->group.size() == 2);
    // area() sums per unit; the rasterized union covers the overlap once.
    CHECK(s->area() == doctest::Approx(8.0));
    GridSpec g{40, 40, 100.0, {0.05, 0.05}};
    CHECK(rasterize(*s, g).count() == 700);
}

TEST_CASE("volume conservation")
{
    const TriangleMesh s = shapes::icosphere({0, 0, 10}, 10, 4);
    const Assembly a = oracle::assembly({{s, "resin"}}, 0.1);
    const LayerStack st = build_layer_stack(a);
    double v = 0;
    for (const auto& l : st.layers)
        for (const auto& sl : l.slices)
            v += sl.area() * st.layer_height;
    const double mesh_v = signed_volume(s);
    CHECK(std::abs(v - mesh_v) / mesh_v < 0.02);
}

TEST_CASE("translation in xy moves contours rigidly")
{
    const TriangleMesh s = shapes::icosphere({0, 0, 5}, 4, 3);
    const auto base = slice_at(s, {}, 5.3);
    const auto moved = slice_at(s, RigidTransform::translate({7.25, -3.5, 0}), 5.3);
    REQUIRE(base.size() == moved.size());
    for (std::size_t c = 0; c < base.size(); ++c) {
        REQUIRE(base[c].points.size() == moved[c].points.size());
        for (std::size_t i = 0; i < base[c].points.size(); ++i) {
            CHECK(std::abs(moved[c].points[i].x - 7.25 - base[c].points[i].x) < 1e-9);
            CHECK(std::abs(moved[c].points[i].y + 3.5 - base[c].points[i].y) < 1e-9);
        }
    }
}

TEST_CASE("slicing is deterministic")
{
    const Assembly a = oracle::assembly({{shapes::icosphere({0, 0, 5}, 5, 3), "resin"},
                                         {shapes::cylinder(0, 0, 1, 0, 10, 24), "precursor"}},
                                        0.2);
    const LayerStack s1 = build_layer_stack(a), s2 = build_layer_stack(a);
    REQUIRE(s1.layers.size() == s2.layers.size());
    for (std::size_t k = 0; k < s1.layers.size(); ++k)
        CHECK(format_layer_dump(s1.layers[k]) == format_layer_dump(s2.layers[k]));
}

TEST_CASE("open mesh raises OpenContour")
{
    TriangleMesh cube = shapes::box({0, 0, 0}, {1, 1, 1});
    // Drop a side facet so a slice through it cannot close.
    for (std::size_t t = 0; t < cube.triangles.size(); ++t) {
        const double z0 = cube.corner(t, 0).z;
        const bool vertical = !(cube.corner(t, 1).z == z0 && cube.corner(t, 2).z == z0);
        if (vertical) {
            cube.triangles.erase(cube.triangles.begin() + std::ptrdiff_t(t));
            break;
        }
    }
    try {
        slice_at(cube, {}, 0.5);
        FAIL("expected OpenContour");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OpenContour);
    }
}
