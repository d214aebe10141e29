#include <doctest.h>

#include "mmdlp/error.hpp"
#include "mmdlp/platability.hpp"
#include "mmdlp/shapes.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mmdlp;

namespace {

TriangleMesh inverted(TriangleMesh m)
{
    for (auto& t : m.triangles)
        std::swap(t[1], t[2]);
    return m;
}

// Solid minus a cavity, as one closed unit.
TriangleMesh hollow(const TriangleMesh& outer, const TriangleMesh& cavity)
{
    return shapes::concat({outer, inverted(cavity)});
}

// Five or six 0.5 mm plates around [0,4]^3.
std::vector<std::pair<TriangleMesh, std::string>> plate_box(bool lid)
{
    std::vector<std::pair<TriangleMesh, std::string>> u{
        {shapes::box({0, 0, 0}, {4, 4, 0.5}), "resin"},   {shapes::box({0, 0, 0}, {0.5, 4, 4}), "resin"},
        {shapes::box({3.5, 0, 0}, {4, 4, 4}), "resin"},   {shapes::box({0, 0, 0}, {4, 0.5, 4}), "resin"},
        {shapes::box({0, 3.5, 0}, {4, 4, 4}), "resin"},
    };
    if (lid)
        u.push_back({shapes::box({0, 0, 3.5}, {4, 4, 4}), "resin"});
    return u;
}

PlatingReport report_for(const Assembly& a, double voxel, int padding = 2)
{
    const VoxelGrid g = voxelize(a, voxel, padding);
    return plating_report(g, flood_void(g));
}

VoxelGrid random_grid(std::size_t n, double fill, std::mt19937& rng)
{
    VoxelGrid g(n, n, n, 1.0, {});
    std::bernoulli_distribution solid(fill);
    for (auto& l : g.labels)
        l = solid(rng) ? (rng() % 2 ? Label::Substrate : Label::Precursor) : Label::Void;
    return g;
}

} // namespace

TEST_CASE("bath constants")
{
    const PlatingBathRecipe b = default_bath();
    CHECK(b.nickel_sulfate_hexahydrate == 60.0);
    CHECK(b.sodium_hypophosphite_monohydrate == 240.0);
    CHECK(b.trisodium_citrate_dihydrate == 200.0);
    CHECK(b.boric_acid == 500.0);
    CHECK(b.ph == 9.0);
    CHECK(b.temperature_c == 70.0);
    CHECK(b.deposition_window_min_minutes == 5.0);
    CHECK(b.deposition_window_max_minutes == 10.0);
}

TEST_CASE("free precursor cube")
{
    const Assembly a = oracle::assembly({{shapes::box({0, 0, 0}, {1, 1, 1}), "precursor"}}, 0.1);
    const VoxelGrid g = voxelize(a, 0.1);
    CHECK(g.nx == 14);
    CHECK(g.count(Label::Precursor) == 1000);
    CHECK(g.count(Label::Void) == g.size() - 1000);
    const PlatingReport r = plating_report(g, flood_void(g));
    REQUIRE(r.patches.size() == 1);
    CHECK(r.plated_faces == 600);
    CHECK(r.patches[0].face_count == 600);
    CHECK(r.plated_area_total == doctest::Approx(6.0));
    CHECK(r.patches[0].centroid.x == doctest::Approx(0.5));
    CHECK(r.patches[0].centroid.z == doctest::Approx(0.5));
    CHECK(r.buried_precursor_volume == doctest::Approx(0.512));
    CHECK(r.unreachable_precursor_area == 0.0);
    CHECK(r.bath == default_bath());
}

TEST_CASE("sphere occupancy volume")
{
    const double exact = 4.0 / 3.0 * std::numbers::pi * 512;
    CHECK(std::abs(exact - 2144.66) < 0.01);
    const Assembly a = oracle::assembly({{shapes::icosphere({0, 0, 8}, 8, 5), "precursor"}}, 0.25);
    const double coarse = double(voxelize(a, 0.25).count(Label::Precursor)) * 0.25 * 0.25 * 0.25;
    const double fine = double(voxelize(a, 0.125).count(Label::Precursor)) * 0.125 * 0.125 * 0.125;
    CHECK(std::abs(coarse - exact) / exact < 0.02);
    CHECK(std::abs(coarse - fine) / fine < 0.02);
}

TEST_CASE("open and closed boxes")
{
    const VoxelGrid open = voxelize(oracle::assembly(plate_box(false), 0.25), 0.25);
    const VoxelGrid closed = voxelize(oracle::assembly(plate_box(true), 0.25), 0.25);
    const auto ro = flood_void(open), rc = flood_void(closed);
    auto center_cell = [](const VoxelGrid& g) {
        return g.index(std::size_t((2 - g.origin.x) / g.voxel), std::size_t((2 - g.origin.y) / g.voxel),
                       std::size_t((2 - g.origin.z) / g.voxel));
    };
    CHECK(open.labels[center_cell(open)] == Label::Void);
    CHECK(ro[center_cell(open)] == 1);
    CHECK(rc[center_cell(closed)] == 0);
}

TEST_CASE("precursor embedded in substrate")
{
    const TriangleMesh ball = shapes::icosphere({0, 0, 6}, 3, 4);
    const Assembly a = oracle::assembly(
        {{hollow(shapes::box({-5, -5, 1}, {5, 5, 11}), ball), "resin"}, {ball, "precursor"}}, 0.2);
    const VoxelGrid g = voxelize(a, 0.2);
    CHECK(g.overlap_cells == 0);
    CHECK(g.warnings.empty());
    const PlatingReport r = plating_report(g, flood_void(g));
    CHECK(r.plated_area_total == 0.0);
    CHECK(r.patches.empty());
    const double v = signed_volume(ball);
    CHECK(std::abs(r.buried_precursor_volume - v) / v < 0.03);
}

TEST_CASE("precursor in a sealed cavity")
{
    const TriangleMesh cavity = shapes::box({-3, -3, 1}, {3, 3, 7});
    const Assembly a = oracle::assembly({{hollow(shapes::box({-4, -4, 0}, {4, 4, 8}), cavity), "resin"},
                                         {shapes::box({-1, -1, 1}, {1, 1, 3}), "precursor"}},
                                        0.25);
    const VoxelGrid g = voxelize(a, 0.25);
    const auto reach = flood_void(g);
    const PlatingReport r = plating_report(g, reach);
    CHECK(r.plated_area_total == 0.0);
    CHECK(r.sealed_void_cells > 0);
    // 2 x 2 top plus four 2 x 2 sides; the bottom rests on the cavity floor.
    CHECK(r.unreachable_precursor_area == doctest::Approx(20.0));
}

TEST_CASE("overlapping roles resolve to precursor with a warning")
{
    const Assembly a = oracle::assembly(
        {{shapes::box({0, 0, 0}, {2, 2, 2}), "resin"}, {shapes::box({1, 0, 0}, {3, 2, 2}), "precursor"}}, 0.25);
    const VoxelGrid g = voxelize(a, 0.25);
    CHECK(g.overlap_cells == 4 * 8 * 8);
    CHECK(g.warnings.size() == 1);
    CHECK(g.count(Label::Precursor) == 8 * 8 * 8);
}

TEST_CASE("non-watertight unit is rejected")
{
    TriangleMesh open = shapes::box({0, 0, 0}, {1, 1, 1});
    open.triangles.pop_back();
    try {
        voxelize(oracle::assembly({{open, "resin"}}, 0.1), 0.1);
        FAIL("expected NonWatertightUnit");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonWatertightUnit);
    }
}

TEST_CASE("flood fill matches the fixpoint oracle")
{
    std::mt19937 rng(5);
    for (std::size_t n : {1, 2, 5, 17, 40, 64}) {
        for (double fill : {0.2, 0.45, 0.7}) {
            const VoxelGrid g = random_grid(n, fill, rng);
            REQUIRE(flood_void(g) == oracle::fixpoint_reachable(g));
        }
    }
    const Assembly a = oracle::assembly(plate_box(true), 0.125);
    const VoxelGrid g = voxelize(a, 0.125);
    REQUIRE(std::max({g.nx, g.ny, g.nz}) <= 64);
    CHECK(flood_void(g) == oracle::fixpoint_reachable(g));
}

TEST_CASE("adding material never grows the reachable set")
{
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        VoxelGrid g = random_grid(24, 0.4, rng);
        const auto before = flood_void(g);
        for (auto& l : g.labels)
            if (l == Label::Void && rng() % 10 == 0)
                l = Label::Substrate;
        const auto after = flood_void(g);
        for (std::size_t i = 0; i < g.size(); ++i)
            REQUIRE(after[i] <= before[i]);
    }
}

TEST_CASE("no plated face borders sealed void")
{
    std::mt19937 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const VoxelGrid g = random_grid(20, 0.5, rng);
        const auto reach = flood_void(g);
        const PlatingReport r = plating_report(g, reach);
        // Recount from scratch: every precursor face against reachable void or the outside.
        std::size_t faces = 0;
        const long n = 20;
        for (long k = 0; k < n; ++k)
            for (long j = 0; j < n; ++j)
                for (long i = 0; i < n; ++i) {
                    if (g.at(i, j, k) != Label::Precursor)
                        continue;
                    const long nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k},
                                           {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
                    for (auto& c : nb) {
                        if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] >= n || c[1] >= n || c[2] >= n) {
                            ++faces;
                            continue;
                        }
                        const std::size_t idx = g.index(c[0], c[1], c[2]);
                        if (g.labels[idx] == Label::Void) {
                            faces += reach[idx];
                        }
                    }
                }
        CHECK(r.plated_faces == faces);
        double sum = 0;
        for (const auto& p : r.patches)
            sum += p.area;
        CHECK(sum == doctest::Approx(r.plated_area_total));
    }
}

TEST_CASE("plated area does not depend on padding")
{
    const Assembly a = oracle::assembly({{shapes::icosphere({0, 0, 4}, 3, 3), "precursor"},
                                         {shapes::box({-4, -4, 0}, {4, 4, 1}), "resin"}},
                                        0.2);
    const PlatingReport r2 = report_for(a, 0.2, 2), r6 = report_for(a, 0.2, 6);
    CHECK(r2.plated_faces == r6.plated_faces);
    CHECK(r2.plated_area_total == r6.plated_area_total);
    CHECK(r2.patches.size() == r6.patches.size());
}

TEST_CASE("halving the voxel barely changes plated area")
{
    const Assembly a = oracle::assembly({{shapes::icosphere({0, 0, 5}, 4, 4), "precursor"}}, 0.2);
    const double coarse = report_for(a, 0.2).plated_area_total;
    const double fine = report_for(a, 0.1).plated_area_total;
    CHECK(std::abs(coarse - fine) / fine < 0.05);
}

TEST_CASE("patches split on separate parts")
{
    const Assembly a = oracle::assembly(
        {{shapes::box({0, 0, 0}, {1, 1, 1}), "precursor"}, {shapes::box({2, 0, 0}, {3, 1, 1}), "precursor"}}, 0.1);
    const PlatingReport r = report_for(a, 0.1);
    REQUIRE(r.patches.size() == 2);
    CHECK(r.patches[0].face_count == 600);
    CHECK(r.patches[1].face_count == 600);
    CHECK(r.patches[0].centroid.x < r.patches[1].centroid.x);
}

TEST_CASE("label dump layout")
{
    VoxelGrid g(3, 2, 1, 0.5, {1, 2, 3});
    g.at(1, 1, 0) = Label::Precursor;
    g.at(2, 0, 0) = Label::Substrate;
    const std::string d = encode_label_dump(g);
    const auto pos = d.find("data\n");
    REQUIRE(pos != std::string::npos);
    CHECK(d.find("dims 3 2 1\n") != std::string::npos);
    const std::string body = d.substr(pos + 5);
    CHECK(body == std::string{0, 0, 1, 0, 2, 0});
}

TEST_CASE("report text carries the bath")
{
    const Assembly a = oracle::assembly({{shapes::box({0, 0, 0}, {1, 1, 1}), "precursor"}}, 0.1);
    const VoxelGrid g = voxelize(a, 0.1);
    const std::string text = format_report(plating_report(g, flood_void(g)), g);
    CHECK(text.find("plated_area_total_mm2=6.000000\n") != std::string::npos);
    CHECK(text.find("bath.NiSO4_6H2O_mmol_L=60\n") != std::string::npos);
    CHECK(text.find("bath.pH=9.0\n") != std::string::npos);
    CHECK(text.find("bath.temperature_C=70\n") != std::string::npos);
}
