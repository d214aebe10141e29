#include <doctest.h>

#include "mmdlp/error.hpp"
#include "mmdlp/geometry_io.hpp"
#include "mmdlp/shapes.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

using namespace mmdlp;

namespace {

std::string binary_stl(std::uint32_t declared, const std::vector<std::array<float, 9>>& facets)
{
    std::string s(80, ' ');
    s.append(reinterpret_cast<const char*>(&declared), 4);
    for (const auto& f : facets) {
        const float normal[3] = {0, 0, 0};
        s.append(reinterpret_cast<const char*>(normal), 12);
        s.append(reinterpret_cast<const char*>(f.data()), 36);
        s.append(2, '\0');
    }
    return s;
}

// 12 facets, every corner repeated per facet.
std::string ascii_cube()
{
    const TriangleMesh m = shapes::box({0, 0, 0}, {1, 1, 1});
    std::string s = "solid cube\n";
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        s += "  facet normal 0 0 0\n    outer loop\n";
        for (int k = 0; k < 3; ++k) {
            const Vec3 v = m.corner(t, k);
            s += "      vertex " + std::to_string(v.x) + " " + std::to_string(v.y) + " " + std::to_string(v.z) + "\n";
        }
        s += "    endloop\n  endfacet\n";
    }
    return s + "endsolid cube\n";
}

TriangleMesh unwelded(const TriangleMesh& m)
{
    TriangleMesh out;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        for (int k = 0; k < 3; ++k)
            out.vertices.push_back(m.corner(t, k));
        const auto b = static_cast<std::uint32_t>(3 * t);
        out.triangles.push_back({b, b + 1, b + 2});
    }
    return out;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("binary stl with one facet")
{
    const std::string data = binary_stl(1, {{0, 0, 0, 1, 0, 0, 0, 1, 0}});
    REQUIRE(data.size() == 134);
    const TriangleMesh m = parse_stl(data);
    CHECK(m.triangles.size() == 1);
    CHECK(m.vertices.size() == 3);
}

TEST_CASE("ascii cube welds to a watertight mesh")
{
    const TriangleMesh raw = parse_stl(ascii_cube());
    CHECK(raw.triangles.size() == 12);
    const WeldResult w = merge_vertices(raw);
    CHECK(w.mesh.vertices.size() == 8);
    CHECK(w.mesh.triangles.size() == 12);
    CHECK(validate_mesh(w.mesh).watertight);
}

TEST_CASE("declared facet count beyond the data is a truncated file")
{
    const std::string data = binary_stl(100, {{0, 0, 0, 1, 0, 0, 0, 1, 0}, {0, 0, 0, 1, 0, 0, 0, 0, 1}});
    CHECK(code_of([&] { parse_stl(data); }) == ErrorCode::TruncatedFile);
}

TEST_CASE("malformed ascii is never reread as binary")
{
    CHECK(code_of([] { parse_stl(std::string("solid x\nfacet normal 0 0 0\nouter loop\nvertex 1 2\n")); }) ==
          ErrorCode::MalformedFacet);
    CHECK(code_of([] { parse_stl(std::string("solid x\nendsolid x\n")); }) == ErrorCode::EmptyMesh);
}

TEST_CASE("binary round trip is bit exact")
{
    const TriangleMesh m = shapes::icosphere({1.25, -3.5, 7}, 4.2, 2);
    const TriangleMesh back = parse_stl(write_stl_binary(m));
    REQUIRE(back.triangles.size() == m.triangles.size());
    const TriangleMesh welded = merge_vertices(back).mesh;
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (int k = 0; k < 3; ++k) {
            const Vec3 a = m.corner(t, k), b = back.corner(t, k);
            CHECK(float(a.x) == b.x);
            CHECK(float(a.y) == b.y);
            CHECK(float(a.z) == b.z);
        }
    CHECK(welded.vertices.size() == m.vertices.size());
}

TEST_CASE("welding duplicates")
{
    const TriangleMesh soup = unwelded(shapes::box({0, 0, 0}, {1, 1, 1}));
    REQUIRE(soup.vertices.size() == 36);
    const WeldResult a = merge_vertices(soup, 1e-6);
    CHECK(a.mesh.vertices.size() == 8);
    CHECK(a.mesh.triangles.size() == 12);
    const WeldResult b = merge_vertices(soup, 0.0);
    CHECK(b.mesh.vertices == a.mesh.vertices);
    CHECK(b.mesh.triangles == a.mesh.triangles);

    SUBCASE("idempotent")
    {
        const WeldResult again = merge_vertices(a.mesh, 1e-6);
        CHECK(again.mesh.vertices == a.mesh.vertices);
        CHECK(again.mesh.triangles == a.mesh.triangles);
    }
}

TEST_CASE("zero area triangle is dropped and counted")
{
    TriangleMesh m = unwelded(shapes::box({0, 0, 0}, {1, 1, 1}));
    const auto b = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back({0, 0, 0});
    m.vertices.push_back({1, 0, 0});
    m.vertices.push_back({2, 0, 0});
    m.triangles.push_back({b, b + 1, b + 2});
    const WeldResult w = merge_vertices(m);
    CHECK(w.degenerate_dropped == 1);
    CHECK(w.mesh.triangles.size() == 12);
}

TEST_CASE("mesh validation")
{
    const TriangleMesh cube = shapes::box({0, 0, 0}, {1, 1, 1});
    const MeshReport r = validate_mesh(cube);
    CHECK(r.watertight);
    CHECK(std::abs(r.signed_volume - 1.0) <= 1e-9);

    TriangleMesh open = cube;
    open.triangles.pop_back();
    CHECK_FALSE(validate_mesh(open).watertight);
    CHECK(validate_mesh(open).boundary_edges == 3);

    const TriangleMesh sphere = shapes::icosphere({0, 0, 0}, 10, 4);
    const double exact = 4.0 / 3.0 * std::numbers::pi * 1000;
    CHECK(std::abs(4188.79 - exact) < 0.01);
    CHECK(validate_mesh(sphere).watertight);
    CHECK(std::abs(signed_volume(sphere) - exact) / exact < 0.01);
}

TEST_CASE("signed volume is invariant under rigid motion")
{
    const TriangleMesh m = shapes::icosphere({0, 0, 0}, 5, 3);
    const double v0 = signed_volume(m);
    const double c = std::cos(0.7), s = std::sin(0.7);
    RigidTransform t;
    t.rotation = {c, -s, 0, s * 0.6, c * 0.6, -0.8, s * 0.8, c * 0.8, 0.6};
    t.translation = {12.5, -40, 7};
    REQUIRE(t.is_orthonormal());
    AssemblyUnit u;
    u.mesh = std::make_shared<const TriangleMesh>(m);
    u.transform = t;
    TriangleMesh moved = m;
    moved.vertices = u.world_vertices();
    CHECK(std::abs(signed_volume(moved) - v0) / v0 < 1e-6);
}

TEST_CASE("manifest loading")
{
    const auto dir = oracle::temp_dir("manifest");
    write_stl_file(shapes::box({0, 0, 0}, {1, 1, 1}), dir / "cube.stl");
    auto manifest = [](const std::string& units, const std::string& materials) {
        return R"({"layer_height_mm": 0.1, "build_volume": {"min": [0,0,0], "max": [10,10,10]},
                   "materials": )" +
               materials + R"(, "units": )" + units + "}";
    };
    const std::string mats =
        R"([{"id": "a", "role": "substrate", "pool": "A"}, {"id": "b", "role": "active_precursor", "pool": "B"}])";

    SUBCASE("valid, transform stored not baked")
    {
        const Assembly a = load_assembly(
            manifest(R"([{"mesh": "cube.stl", "material": "a", "transform": {"translation": [2, 3, 0]}}])", mats), dir);
        REQUIRE(a.units.size() == 1);
        Box3 local;
        for (const auto& v : a.units[0].mesh->vertices)
            local.expand(v);
        CHECK(local.min == Vec3{0, 0, 0});
        CHECK(local.max == Vec3{1, 1, 1});
        CHECK(a.units[0].world_bounds().min == Vec3{2, 3, 0});
        CHECK(a.units[0].material.pool == Pool::A);
        CHECK(a.layer_height == 0.1);
    }
    SUBCASE("missing mesh")
    {
        CHECK(code_of([&] { load_assembly(manifest(R"([{"mesh": "nope.stl", "material": "a"}])", mats), dir); }) ==
              ErrorCode::MissingMeshFile);
    }
    SUBCASE("duplicate material")
    {
        const std::string dup =
            R"([{"id": "a", "role": "substrate", "pool": "A"}, {"id": "a", "role": "active_precursor", "pool": "B"}])";
        CHECK(code_of([&] { load_assembly(manifest(R"([{"mesh": "cube.stl", "material": "a"}])", dup), dir); }) ==
              ErrorCode::DuplicateMaterialId);
    }
    SUBCASE("outside build volume")
    {
        CHECK(code_of([&] {
                  load_assembly(manifest(R"([{"mesh": "cube.stl", "material": "a",
                                             "transform": {"translation": [9.5, 0, 0]}}])",
                                         mats),
                                dir);
              }) == ErrorCode::UnitOutsideBuildVolume);
    }
    SUBCASE("unknown key")
    {
        CHECK(code_of([&] {
                  load_assembly(manifest(R"([{"mesh": "cube.stl", "material": "a", "colour": 1}])", mats), dir);
              }) == ErrorCode::InvalidManifest);
    }
    SUBCASE("no units")
    {
        CHECK(code_of([&] { load_assembly(manifest("[]", mats), dir); }) == ErrorCode::InvalidManifest);
    }
}
