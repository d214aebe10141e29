#include "mmdlp/geometry_io.hpp"

#include "mmdlp/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace mmdlp {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedFacet: return "MalformedFacet";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::MissingMeshFile: return "MissingMeshFile";
    case ErrorCode::DuplicateMaterialId: return "DuplicateMaterialId";
    case ErrorCode::UnitOutsideBuildVolume: return "UnitOutsideBuildVolume";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::OpenContour: return "OpenContour";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::UnknownMaterial: return "UnknownMaterial";
    case ErrorCode::NonWatertightUnit: return "NonWatertightUnit";
    case ErrorCode::ProgramSyntax: return "ProgramSyntax";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SimulationViolation: return "SimulationViolation";
    }
    return "Unknown";
}

std::string_view to_string(MaterialRole role)
{
    return role == MaterialRole::Substrate ? "substrate" : "active_precursor";
}

std::string_view to_string(Pool pool) { return pool == Pool::A ? "A" : "B"; }

void Box3::expand(Vec3 p)
{
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
}

void Box3::expand(const Box3& b)
{
    if (b.empty())
        return;
    expand(b.min);
    expand(b.max);
}

bool Box3::contains(const Box3& inner, double tol) const
{
    return inner.min.x >= min.x - tol && inner.min.y >= min.y - tol && inner.min.z >= min.z - tol &&
           inner.max.x <= max.x + tol && inner.max.y <= max.y + tol && inner.max.z <= max.z + tol;
}

Vec3 RigidTransform::apply(Vec3 p) const
{
    const auto& r = rotation;
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
            r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
            r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
}

bool RigidTransform::is_orthonormal(double tol) const
{
    // R R^T == I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k)
                s += rotation[3 * i + k] * rotation[3 * j + k];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol)
                return false;
        }
    }
    const auto& r = rotation;
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    return det > 0;
}

std::vector<Vec3> AssemblyUnit::world_vertices() const
{
    std::vector<Vec3> out;
    out.reserve(mesh->vertices.size());
    for (const auto& v : mesh->vertices)
        out.push_back(transform.apply(v));
    return out;
}

Box3 AssemblyUnit::world_bounds() const
{
    Box3 b;
    for (const auto& v : mesh->vertices)
        b.expand(transform.apply(v));
    return b;
}

Box3 Assembly::bounds() const
{
    Box3 b;
    for (const auto& u : units)
        b.expand(u.world_bounds());
    return b;
}

const MaterialTag* Assembly::find_material(std::string_view id) const
{
    for (const auto& m : materials)
        if (m.id == id)
            return &m;
    return nullptr;
}

// ---- STL -------------------------------------------------------------------

namespace {

constexpr std::size_t kStlHeader = 80;
constexpr std::size_t kStlFacet = 50;

std::uint32_t read_u32le(const unsigned char* p)
{
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

float read_f32le(const unsigned char* p)
{
    return std::bit_cast<float>(read_u32le(p));
}

void put_u32le(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32le(std::string& out, float f) { put_u32le(out, std::bit_cast<std::uint32_t>(f)); }

bool finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

TriangleMesh parse_binary(std::string_view data, std::uint32_t count, std::string name)
{
    TriangleMesh mesh;
    mesh.name = std::move(name);
    mesh.vertices.reserve(std::size_t(count) * 3);
    mesh.triangles.reserve(count);
    const auto* base = reinterpret_cast<const unsigned char*>(data.data()) + kStlHeader + 4;
    for (std::uint32_t f = 0; f < count; ++f) {
        const unsigned char* p = base + std::size_t(f) * kStlFacet + 12; // skip normal
        const auto first = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int k = 0; k < 3; ++k, p += 12) {
            Vec3 v{read_f32le(p), read_f32le(p + 4), read_f32le(p + 8)};
            if (!finite(v))
                throw Error(ErrorCode::MalformedFacet, fmt::format("facet {} has a non-finite coordinate", f));
            mesh.vertices.push_back(v);
        }
        mesh.triangles.push_back({first, first + 1, first + 2});
    }
    return mesh;
}

class AsciiTokens {
public:
    explicit AsciiTokens(std::string_view text) : text_(text) {}

    std::string_view next()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    std::string rest_of_line()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n')
            ++pos_;
        std::string s(text_.substr(start, pos_ - start));
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

double parse_number(std::string_view tok, std::size_t facet)
{
    double v = 0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw Error(ErrorCode::MalformedFacet, fmt::format("facet {}: bad number '{}'", facet, tok));
    return v;
}

void expect(AsciiTokens& t, std::string_view word, std::size_t facet)
{
    auto tok = t.next();
    if (tok != word)
        throw Error(ErrorCode::MalformedFacet,
                    fmt::format("facet {}: expected '{}', got '{}'", facet, word, tok));
}

TriangleMesh parse_ascii(std::string_view text, std::string name)
{
    AsciiTokens t(text);
    expect(t, "solid", 0);
    std::string solid_name = t.rest_of_line();
    TriangleMesh mesh;
    mesh.name = name.empty() ? solid_name : std::move(name);

    for (std::size_t facet = 0;; ++facet) {
        auto tok = t.next();
        if (tok == "endsolid")
            break;
        if (tok.empty())
            throw Error(ErrorCode::MalformedFacet, "missing 'endsolid'");
        if (tok != "facet")
            throw Error(ErrorCode::MalformedFacet, fmt::format("facet {}: expected 'facet', got '{}'", facet, tok));
        expect(t, "normal", facet);
        for (int i = 0; i < 3; ++i)
            parse_number(t.next(), facet);
        expect(t, "outer", facet);
        expect(t, "loop", facet);
        const auto first = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int k = 0; k < 3; ++k) {
            expect(t, "vertex", facet);
            Vec3 v;
            v.x = parse_number(t.next(), facet);
            v.y = parse_number(t.next(), facet);
            v.z = parse_number(t.next(), facet);
            mesh.vertices.push_back(v);
        }
        expect(t, "endloop", facet);
        expect(t, "endfacet", facet);
        mesh.triangles.push_back({first, first + 1, first + 2});
    }
    return mesh;
}

bool starts_with_solid(std::string_view data)
{
    auto p = data.find_first_not_of(" \t\r\n");
    return p != std::string_view::npos && data.substr(p, 5) == "solid";
}

} // namespace

TriangleMesh parse_stl(std::string_view data, std::string name)
{
    if (data.empty())
        throw Error(ErrorCode::EmptyMesh, "empty STL input");

    std::uint32_t declared = 0;
    const bool has_header = data.size() >= kStlHeader + 4;
    if (has_header)
        declared = read_u32le(reinterpret_cast<const unsigned char*>(data.data()) + kStlHeader);
    const std::uint64_t expected = kStlHeader + 4 + std::uint64_t(declared) * kStlFacet;

    TriangleMesh mesh;
    if (has_header && data.size() == expected) {
        mesh = parse_binary(data, declared, std::move(name));
    } else if (starts_with_solid(data)) {
        mesh = parse_ascii(data, std::move(name));
    } else if (!has_header || expected > data.size()) {
        throw Error(ErrorCode::TruncatedFile,
                    fmt::format("binary STL declares {} facets but holds {} bytes", declared, data.size()));
    } else {
        // Trailing bytes after the declared facets are ignored.
        mesh = parse_binary(data, declared, std::move(name));
    }
    if (mesh.triangles.empty())
        throw Error(ErrorCode::EmptyMesh, "STL contains no facets");
    return mesh;
}

TriangleMesh parse_stl(std::span<const std::byte> bytes, std::string name)
{
    return parse_stl(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                     std::move(name));
}

TriangleMesh read_stl_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::MissingMeshFile, path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_stl(std::string_view(data), path.stem().string());
}

namespace {

Vec3 facet_normal(Vec3 a, Vec3 b, Vec3 c)
{
    Vec3 n = cross(b - a, c - a);
    const double len = std::sqrt(dot(n, n));
    return len > 0 ? n * (1.0 / len) : Vec3{};
}

} // namespace

std::string write_stl_binary(const TriangleMesh& mesh)
{
    std::string out;
    out.reserve(kStlHeader + 4 + mesh.triangles.size() * kStlFacet);
    std::string header = "binary stl " + mesh.name;
    header.resize(kStlHeader, ' ');
    out += header;
    put_u32le(out, static_cast<std::uint32_t>(mesh.triangles.size()));
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
        for (Vec3 v : {facet_normal(a, b, c), a, b, c}) {
            put_f32le(out, static_cast<float>(v.x));
            put_f32le(out, static_cast<float>(v.y));
            put_f32le(out, static_cast<float>(v.z));
        }
        out.push_back('\0');
        out.push_back('\0');
    }
    return out;
}

std::string write_stl_ascii(const TriangleMesh& mesh)
{
    std::string out = fmt::format("solid {}\n", mesh.name);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
        const Vec3 n = facet_normal(a, b, c);
        out += fmt::format("  facet normal {} {} {}\n    outer loop\n", n.x, n.y, n.z);
        for (Vec3 v : {a, b, c})
            out += fmt::format("      vertex {} {} {}\n", v.x, v.y, v.z);
        out += "    endloop\n  endfacet\n";
    }
    out += fmt::format("endsolid {}\n", mesh.name);
    return out;
}

void write_stl_file(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    const std::string data = write_stl_binary(mesh);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

// ---- Welding ----------------------------------------------------------------

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept
    {
        std::uint64_t h = std::uint64_t(k.x) * 0x9E3779B97F4A7C15ull;
        h ^= std::uint64_t(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= std::uint64_t(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

bool zero_area(Vec3 a, Vec3 b, Vec3 c)
{
    const Vec3 n = cross(b - a, c - a);
    return dot(n, n) == 0.0;
}

} // namespace

WeldResult merge_vertices(const TriangleMesh& mesh, double weld_tol)
{
    if (!(weld_tol >= 0))
        throw Error(ErrorCode::InvalidArgument, "weld tolerance must be >= 0");

    // Representative vertices are pairwise farther apart than weld_tol, which
    // makes a second pass a no-op.
    const bool exact = weld_tol < 1e-12;
    const double cell = exact ? 1.0 : weld_tol;
    const double tol2 = weld_tol * weld_tol;

    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> grid;
    std::vector<Vec3> reps;
    std::vector<std::uint32_t> remap(mesh.vertices.size());

    auto key_of = [&](Vec3 v) {
        return CellKey{static_cast<std::int64_t>(std::floor(v.x / cell)),
                       static_cast<std::int64_t>(std::floor(v.y / cell)),
                       static_cast<std::int64_t>(std::floor(v.z / cell))};
    };

    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3 v = mesh.vertices[i];
        const CellKey k = key_of(v);
        std::uint32_t found = UINT32_MAX;
        const int reach = exact ? 0 : 1;
        for (int dx = -reach; dx <= reach; ++dx)
            for (int dy = -reach; dy <= reach; ++dy)
                for (int dz = -reach; dz <= reach; ++dz) {
                    auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid.end())
                        continue;
                    for (std::uint32_t r : it->second) {
                        if (r >= found)
                            break;
                        const Vec3 d = reps[r] - v;
                        if (exact ? reps[r] == v : dot(d, d) <= tol2)
                            found = r;
                    }
                }
        if (found == UINT32_MAX) {
            found = static_cast<std::uint32_t>(reps.size());
            reps.push_back(v);
            grid[k].push_back(found);
        }
        remap[i] = found;
    }

    WeldResult result;
    result.mesh.name = mesh.name;
    std::vector<std::uint32_t> compact(reps.size(), UINT32_MAX);
    for (const Triangle& t : mesh.triangles) {
        const Triangle w{remap[t[0]], remap[t[1]], remap[t[2]]};
        if (w[0] == w[1] || w[1] == w[2] || w[0] == w[2] || zero_area(reps[w[0]], reps[w[1]], reps[w[2]])) {
            ++result.degenerate_dropped;
            continue;
        }
        Triangle out;
        for (int k = 0; k < 3; ++k) {
            if (compact[w[k]] == UINT32_MAX) {
                compact[w[k]] = static_cast<std::uint32_t>(result.mesh.vertices.size());
                result.mesh.vertices.push_back(reps[w[k]]);
            }
            out[k] = compact[w[k]];
        }
        result.mesh.triangles.push_back(out);
    }
    return result;
}

double signed_volume(const TriangleMesh& mesh)
{
    double v = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        v += dot(mesh.corner(t, 0), cross(mesh.corner(t, 1), mesh.corner(t, 2)));
    return v / 6.0;
}

MeshReport validate_mesh(const TriangleMesh& mesh)
{
    MeshReport report;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_use;
    edge_use.reserve(mesh.triangles.size() * 3);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] ||
            zero_area(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)))
            ++report.degenerate_count;
        for (int k = 0; k < 3; ++k) {
            std::uint32_t a = tri[k], b = tri[(k + 1) % 3];
            if (a > b)
                std::swap(a, b);
            ++edge_use[std::uint64_t(a) << 32 | b];
        }
    }
    for (const auto& [edge, n] : edge_use) {
        if (n == 1)
            ++report.boundary_edges;
        else if (n > 2)
            ++report.nonmanifold_edges;
    }
    report.watertight = !mesh.triangles.empty() && report.boundary_edges == 0 && report.nonmanifold_edges == 0;
    for (const auto& v : mesh.vertices)
        report.bounds.expand(v);
    report.signed_volume = signed_volume(mesh);
    return report;
}

// ---- Manifest ---------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void bad_manifest(const std::string& msg) { throw Error(ErrorCode::InvalidManifest, msg); }

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!obj.is_object())
        bad_manifest(fmt::format("{} must be an object", where));
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            bad_manifest(fmt::format("unknown key '{}' in {}", key, where));
    }
}

const json& require(const json& obj, const char* key, std::string_view where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        bad_manifest(fmt::format("missing '{}' in {}", key, where));
    return *it;
}

double as_number(const json& j, std::string_view where)
{
    if (!j.is_number())
        bad_manifest(fmt::format("{} must be a number", where));
    const double v = j.get<double>();
    if (!std::isfinite(v))
        bad_manifest(fmt::format("{} must be finite", where));
    return v;
}

template <std::size_t N>
std::array<double, N> as_array(const json& j, std::string_view where)
{
    if (!j.is_array() || j.size() != N)
        bad_manifest(fmt::format("{} must be an array of {} numbers", where, N));
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = as_number(j[i], where);
    return out;
}

Vec3 as_vec3(const json& j, std::string_view where)
{
    auto a = as_array<3>(j, where);
    return {a[0], a[1], a[2]};
}

bool valid_material_id(const std::string& id)
{
    static const std::regex re("[A-Za-z0-9_-]+");
    return std::regex_match(id, re);
}

} // namespace

Assembly load_assembly(std::string_view manifest_json, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(manifest_json);
    } catch (const json::parse_error& e) {
        bad_manifest(e.what());
    }
    reject_unknown_keys(doc, {"units", "materials", "build_volume", "layer_height_mm", "weld_tol_mm"}, "manifest");

    Assembly asm_;
    asm_.layer_height = as_number(require(doc, "layer_height_mm", "manifest"), "layer_height_mm");
    if (!(asm_.layer_height > 0))
        bad_manifest("layer_height_mm must be > 0");
    if (doc.contains("weld_tol_mm")) {
        asm_.weld_tol = as_number(doc["weld_tol_mm"], "weld_tol_mm");
        if (asm_.weld_tol < 0)
            bad_manifest("weld_tol_mm must be >= 0");
    }

    const json& bv = require(doc, "build_volume", "manifest");
    reject_unknown_keys(bv, {"min", "max"}, "build_volume");
    asm_.build_volume.min = as_vec3(require(bv, "min", "build_volume"), "build_volume.min");
    asm_.build_volume.max = as_vec3(require(bv, "max", "build_volume"), "build_volume.max");
    if (asm_.build_volume.empty())
        bad_manifest("build_volume.min must not exceed build_volume.max");
    if (asm_.build_volume.min.z < 0)
        bad_manifest("build_volume.min.z must be >= 0 (z = 0 is the build plate)");

    const json& mats = require(doc, "materials", "manifest");
    if (!mats.is_array())
        bad_manifest("materials must be an array");
    std::map<MaterialRole, Pool> role_pool;
    std::map<Pool, MaterialRole> pool_role;
    for (const json& m : mats) {
        reject_unknown_keys(m, {"id", "role", "pool"}, "material");
        MaterialTag tag;
        const json& id = require(m, "id", "material");
        if (!id.is_string() || !valid_material_id(id.get<std::string>()))
            bad_manifest("material id must be a non-empty string of [A-Za-z0-9_-]");
        tag.id = id.get<std::string>();
        const json& role = require(m, "role", "material");
        if (role == "substrate")
            tag.role = MaterialRole::Substrate;
        else if (role == "active_precursor")
            tag.role = MaterialRole::ActivePrecursor;
        else
            bad_manifest(fmt::format("material '{}': role must be \"substrate\" or \"active_precursor\"", tag.id));
        const json& pool = require(m, "pool", "material");
        if (pool == "A")
            tag.pool = Pool::A;
        else if (pool == "B")
            tag.pool = Pool::B;
        else
            bad_manifest(fmt::format("material '{}': pool must be \"A\" or \"B\"", tag.id));

        if (asm_.find_material(tag.id))
            throw Error(ErrorCode::DuplicateMaterialId, tag.id);
        auto [rit, rnew] = role_pool.emplace(tag.role, tag.pool);
        auto [pit, pnew] = pool_role.emplace(tag.pool, tag.role);
        if (rit->second != tag.pool || pit->second != tag.role)
            bad_manifest(fmt::format("material '{}': each role must map to exactly one pool", tag.id));
        asm_.materials.push_back(std::move(tag));
    }

    const json& units = require(doc, "units", "manifest");
    if (!units.is_array() || units.empty())
        bad_manifest("units must be a non-empty array");

    std::map<std::filesystem::path, std::shared_ptr<const TriangleMesh>> cache;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const json& u = units[i];
        const std::string where = fmt::format("units[{}]", i);
        reject_unknown_keys(u, {"mesh", "material", "transform"}, where);
        const json& mesh_path = require(u, "mesh", where);
        const json& material = require(u, "material", where);
        if (!mesh_path.is_string() || !material.is_string())
            bad_manifest(where + ": mesh and material must be strings");

        AssemblyUnit unit;
        const MaterialTag* tag = asm_.find_material(material.get<std::string>());
        if (!tag)
            throw Error(ErrorCode::UnknownMaterial, where + ": " + material.get<std::string>());
        unit.material = *tag;

        if (u.contains("transform")) {
            const json& tr = u["transform"];
            reject_unknown_keys(tr, {"rotation", "translation"}, where + ".transform");
            if (tr.contains("rotation"))
                unit.transform.rotation = as_array<9>(tr["rotation"], where + ".transform.rotation");
            if (tr.contains("translation"))
                unit.transform.translation = as_vec3(tr["translation"], where + ".transform.translation");
            if (!unit.transform.is_orthonormal(1e-9))
                bad_manifest(where + ": rotation is not orthonormal within 1e-9");
        }

        std::filesystem::path p = base_dir / mesh_path.get<std::string>();
        auto& cached = cache[p];
        if (!cached) {
            if (!std::filesystem::is_regular_file(p))
                throw Error(ErrorCode::MissingMeshFile, p.string());
            WeldResult welded = merge_vertices(read_stl_file(p), asm_.weld_tol);
            const MeshReport rep = validate_mesh(welded.mesh);
            if (!rep.watertight)
                asm_.warnings.push_back(fmt::format("mesh '{}' is not watertight ({} boundary, {} non-manifold edges)",
                                                    p.filename().string(), rep.boundary_edges,
                                                    rep.nonmanifold_edges));
            if (welded.mesh.triangles.empty())
                throw Error(ErrorCode::EmptyMesh, p.string());
            cached = std::make_shared<const TriangleMesh>(std::move(welded.mesh));
        }
        unit.mesh = cached;

        if (!asm_.build_volume.contains(unit.world_bounds(), 1e-9))
            throw Error(ErrorCode::UnitOutsideBuildVolume, where + " (" + p.filename().string() + ")");
        asm_.units.push_back(std::move(unit));
    }
    return asm_;
}

Assembly load_assembly_file(const std::filesystem::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read manifest " + manifest_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load_assembly(ss.str(), manifest_path.parent_path());
}

} // namespace mmdlp
