#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmdlp {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Axis-aligned box. A default-constructed box is empty (min > max).
struct Box3 {
    Vec3 min{1e300, 1e300, 1e300};
    Vec3 max{-1e300, -1e300, -1e300};

    bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }
    void expand(Vec3 p);
    void expand(const Box3& b);
    bool contains(const Box3& inner, double tol = 0.0) const;
};

using Triangle = std::array<std::uint32_t, 3>;

// Indexed triangle soup, millimeters.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::string name;

    Vec3 corner(std::size_t tri, int k) const { return vertices[triangles[tri][k]]; }
};

enum class MaterialRole { Substrate, ActivePrecursor };
enum class Pool { A, B };

std::string_view to_string(MaterialRole role);
std::string_view to_string(Pool pool);

struct MaterialTag {
    std::string id;
    MaterialRole role = MaterialRole::Substrate;
    Pool pool = Pool::A;

    friend bool operator==(const MaterialTag&, const MaterialTag&) = default;
};

// Rigid placement: p' = R p + t, R row-major.
struct RigidTransform {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation;

    static RigidTransform identity() { return {}; }
    static RigidTransform translate(Vec3 t) { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}, t}; }

    Vec3 apply(Vec3 p) const;
    bool is_orthonormal(double tol = 1e-9) const;
};

struct AssemblyUnit {
    std::shared_ptr<const TriangleMesh> mesh;
    MaterialTag material;
    RigidTransform transform;

    // Mesh vertices mapped into the build frame. The stored mesh is never modified.
    std::vector<Vec3> world_vertices() const;
    Box3 world_bounds() const;
};

struct Assembly {
    std::vector<AssemblyUnit> units;
    std::vector<MaterialTag> materials;
    Box3 build_volume;
    double layer_height = 0;
    double weld_tol = 1e-6;
    std::vector<std::string> warnings;

    Box3 bounds() const;
    const MaterialTag* find_material(std::string_view id) const;
};

// ---- STL ---------------------------------------------------------------

// Auto-detects binary vs ASCII. Binary wins when the byte length equals
// 84 + 50 * declared_count; otherwise text starting with "solid" is parsed as
// ASCII and any token error is fatal (never reinterpreted as binary).
TriangleMesh parse_stl(std::span<const std::byte> bytes, std::string name = {});
TriangleMesh parse_stl(std::string_view bytes, std::string name = {});
TriangleMesh read_stl_file(const std::filesystem::path& path);

std::string write_stl_binary(const TriangleMesh& mesh);
std::string write_stl_ascii(const TriangleMesh& mesh);
void write_stl_file(const TriangleMesh& mesh, const std::filesystem::path& path);

// ---- Welding and validation ---------------------------------------------

constexpr double kDefaultWeldTol = 1e-6;

struct WeldResult {
    TriangleMesh mesh;
    std::size_t degenerate_dropped = 0;
};

// Vertices within weld_tol (inclusive) of an earlier kept vertex collapse onto
// it. Triangles that end up with a repeated index or zero area are dropped.
WeldResult merge_vertices(const TriangleMesh& mesh, double weld_tol = kDefaultWeldTol);

struct MeshReport {
    bool watertight = false;
    std::size_t degenerate_count = 0;
    std::size_t boundary_edges = 0;     // used by exactly one triangle
    std::size_t nonmanifold_edges = 0;  // used by three or more
    Box3 bounds;
    double signed_volume = 0;
};

MeshReport validate_mesh(const TriangleMesh& mesh);

double signed_volume(const TriangleMesh& mesh);

// ---- Assembly manifest ---------------------------------------------------

// Parses the JSON manifest; mesh paths resolve relative to base_dir.
Assembly load_assembly(std::string_view manifest_json, const std::filesystem::path& base_dir);
Assembly load_assembly_file(const std::filesystem::path& manifest_path);

} // namespace mmdlp
