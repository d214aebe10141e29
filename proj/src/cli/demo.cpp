#include "mmdlp/cli.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/shapes.hpp"

#include <json.hpp>

#include <fstream>

namespace mmdlp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DemoUnit {
    std::string file;
    TriangleMesh mesh;
    std::string material;
};

struct DemoCase {
    std::string name;
    double layer_height;
    std::vector<DemoUnit> units;
};

constexpr int kSegments = 64;

TriangleMesh ring(double r0, double r1, double z0, double z1)
{
    return shapes::revolve({{r0, z0}, {r1, z0}, {r1, z1}, {r0, z1}}, kSegments);
}

TriangleMesh disc(double r, double z0, double z1) { return shapes::revolve({{0, z0}, {r, z0}, {r, z1}, {0, z1}}, kSegments); }

// Liner on the inside of the tube wall with a thin baffle across the bore.
TriangleMesh liner_with_baffle()
{
    return shapes::revolve({{2.5, 2}, {3, 2}, {3, 18}, {2.5, 18}, {2.5, 10.25}, {0.25, 10.25}, {0.25, 9.75}, {2.5, 9.75}},
                   kSegments);
}

std::vector<DemoCase> demo_cases()
{
    std::vector<DemoCase> c;
    c.push_back({"single_cube", 0.1, {{"cube.stl", shapes::box({0, 0, 0}, {1, 1, 1}), "resin"}}});
    c.push_back({"stacked_cubes",
                 0.05,
                 {{"lower.stl", shapes::box({0, 0, 0}, {10, 10, 5}), "resin"},
                  {"upper.stl", shapes::box({0, 0, 5}, {10, 10, 10}), "precursor"}}});
    c.push_back({"nested_tubes",
                 0.05,
                 {{"tube.stl", shapes::square_tube(0, 0, 2, 5, 0, 10), "resin"},
                  {"core.stl", shapes::box({-2, -2, 0}, {2, 2, 10}), "precursor"}}});
    c.push_back({"overlapping_cubes",
                 0.05,
                 {{"left.stl", shapes::box({0, 0, 0}, {10, 10, 10}), "resin"},
                  {"right.stl", shapes::box({5, 0, 0}, {15, 10, 10}), "precursor"}}});
    c.push_back({"tube_open",
                 0.1,
                 {{"wall.stl", ring(3, 4, 0, 20), "resin"}, {"liner.stl", liner_with_baffle(), "precursor"}}});
    c.push_back({"tube_sealed",
                 0.1,
                 {{"wall.stl", ring(3, 4, 0, 20), "resin"},
                  {"cap_bottom.stl", disc(3, 0, 1), "resin"},
                  {"cap_top.stl", disc(3, 19, 20), "resin"},
                  {"liner.stl", liner_with_baffle(), "precursor"}}});
    c.push_back({"pierced_shell",
                 0.1,
                 {{"shell.stl", shapes::pierced_shell({0, 0, 15}, 13, 15, 0.2, kSegments), "resin"},
                  {"core.stl", shapes::icosphere({0, 0, 15}, 8, 4), "precursor"}}});
    return c;
}

} // namespace

std::vector<fs::path> write_demo(const fs::path& dir)
{
    std::vector<fs::path> manifests;
    for (const auto& demo : demo_cases()) {
        const fs::path sub = dir / demo.name;
        fs::create_directories(sub);
        json doc;
        doc["layer_height_mm"] = demo.layer_height;
        doc["build_volume"] = {{"min", {-60, -38, 0}}, {"max", {60, 38, 100}}};
        doc["materials"] = json::array({{{"id", "resin"}, {"role", "substrate"}, {"pool", "A"}},
                                        {{"id", "precursor"}, {"role", "active_precursor"}, {"pool", "B"}}});
        doc["units"] = json::array();
        for (const auto& u : demo.units) {
            write_stl_file(u.mesh, sub / u.file);
            doc["units"].push_back({{"mesh", u.file}, {"material", u.material}});
        }
        const fs::path manifest = sub / "manifest.json";
        std::ofstream out(manifest, std::ios::binary);
        out << doc.dump(2) << "\n";
        if (!out)
            throw Error(ErrorCode::IoFailure, "cannot write " + manifest.string());
        manifests.push_back(manifest);
    }
    return manifests;
}

} // namespace mmdlp::cli
