#include "mmdlp/slicing.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

namespace mmdlp {

double Contour::signed_area() const
{
    double a = 0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = points[i], q = points[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return a / 2;
}

double Contour::perimeter() const
{
    double len = 0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = points[i], q = points[(i + 1) % n];
        len += std::hypot(q.x - p.x, q.y - p.y);
    }
    return len;
}

namespace {

bool point_in_contour(Vec2 p, const Contour& c)
{
    bool inside = false;
    const std::size_t n = c.points.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = c.points[i], b = c.points[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x)
                inside = !inside;
        }
    }
    return inside;
}

} // namespace

double even_odd_area(const std::vector<Contour>& contours)
{
    double total = 0;
    for (std::size_t i = 0; i < contours.size(); ++i) {
        const auto& pts = contours[i].points;
        if (pts.size() < 3)
            continue;
        const Vec2 probe{(pts[0].x + pts[1].x) / 2, (pts[0].y + pts[1].y) / 2};
        int depth = 0;
        for (std::size_t j = 0; j < contours.size(); ++j)
            if (j != i && contours[j].points.size() >= 3 && point_in_contour(probe, contours[j]))
                ++depth;
        const double a = std::abs(contours[i].signed_area());
        total += (depth % 2 == 0) ? a : -a;
    }
    return total;
}

double LayerSlice::area() const
{
    std::map<std::uint32_t, std::vector<Contour>> by_group;
    for (std::size_t i = 0; i < contours.size(); ++i)
        by_group[i < group.size() ? group[i] : 0].push_back(contours[i]);
    double total = 0;
    for (const auto& [g, cs] : by_group)
        total += even_odd_area(cs);
    return total;
}

const LayerSlice* Layer::find(std::string_view material) const
{
    for (const auto& s : slices)
        if (s.material == material)
            return &s;
    return nullptr;
}

double layer_z(std::size_t k, double layer_height) { return (static_cast<double>(k) + 0.5) * layer_height; }

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t a)
    {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

struct GridKey {
    std::int64_t x, y;
    bool operator==(const GridKey&) const = default;
};
struct GridKeyHash {
    std::size_t operator()(const GridKey& k) const noexcept
    {
        return static_cast<std::size_t>(std::uint64_t(k.x) * 0x9E3779B97F4A7C15ull ^ std::uint64_t(k.y));
    }
};

} // namespace

std::vector<Contour> slice_at(const TriangleMesh& mesh, const RigidTransform& transform, double z, double eps)
{
    if (!(eps > 0))
        throw Error(ErrorCode::InvalidArgument, "slice eps must be > 0");

    std::vector<Vec3> wv;
    wv.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices)
        wv.push_back(transform.apply(v));
    for (const auto& v : wv) {
        if (std::abs(v.z - z) < eps) {
            z += eps / 2;
            break;
        }
    }

    // One node per crossed mesh edge; the crossing point is computed from the
    // edge's lower-index endpoint so both adjacent triangles agree bitwise.
    std::unordered_map<std::uint64_t, std::uint32_t> edge_node;
    std::vector<Vec2> nodes;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> segments;

    auto node_for = [&](std::uint32_t a, std::uint32_t b) {
        if (a > b)
            std::swap(a, b);
        const std::uint64_t key = std::uint64_t(a) << 32 | b;
        auto [it, inserted] = edge_node.try_emplace(key, static_cast<std::uint32_t>(nodes.size()));
        if (inserted) {
            const Vec3 p = wv[a], q = wv[b];
            const double t = (z - p.z) / (q.z - p.z);
            nodes.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
        return it->second;
    };

    for (const auto& tri : mesh.triangles) {
        bool above[3];
        for (int k = 0; k < 3; ++k)
            above[k] = wv[tri[k]].z >= z;
        if (above[0] == above[1] && above[1] == above[2])
            continue;
        std::uint32_t ends[2];
        int n = 0;
        for (int k = 0; k < 3; ++k) {
            const int j = (k + 1) % 3;
            if (above[k] != above[j])
                ends[n++] = node_for(tri[k], tri[j]);
        }
        segments.emplace_back(ends[0], ends[1]);
    }
    if (segments.empty())
        return {};

    // Snap dangling nodes closer than eps (meshes that were not welded). Nodes
    // already closed by shared edges stay put so corners are not dragged.
    std::vector<std::uint32_t> degree(nodes.size(), 0);
    for (auto [a, b] : segments) {
        ++degree[a];
        ++degree[b];
    }
    UnionFind uf(nodes.size());
    {
        std::unordered_map<GridKey, std::vector<std::uint32_t>, GridKeyHash> grid;
        const double eps2 = eps * eps;
        for (std::uint32_t i = 0; i < nodes.size(); ++i) {
            if (degree[i] % 2 == 0)
                continue;
            const GridKey k{static_cast<std::int64_t>(std::floor(nodes[i].x / eps)),
                            static_cast<std::int64_t>(std::floor(nodes[i].y / eps))};
            for (int dx = -1; dx <= 1; ++dx)
                for (int dy = -1; dy <= 1; ++dy) {
                    auto it = grid.find({k.x + dx, k.y + dy});
                    if (it == grid.end())
                        continue;
                    for (std::uint32_t j : it->second) {
                        const double ddx = nodes[i].x - nodes[j].x, ddy = nodes[i].y - nodes[j].y;
                        if (ddx * ddx + ddy * ddy <= eps2)
                            uf.unite(i, j);
                    }
                }
            grid[k].push_back(i);
        }
    }

    std::vector<std::vector<std::uint32_t>> incident(nodes.size());
    for (std::uint32_t s = 0; s < segments.size(); ++s) {
        auto& [a, b] = segments[s];
        a = uf.find(a);
        b = uf.find(b);
        if (a == b)
            continue;
        incident[a].push_back(s);
        incident[b].push_back(s);
    }
    for (std::uint32_t n = 0; n < nodes.size(); ++n) {
        if (!incident[n].empty() && incident[n].size() != 2)
            throw Error(ErrorCode::OpenContour,
                        fmt::format("contour node at ({:.6f}, {:.6f}) z={:.6f} joins {} segments", nodes[n].x,
                                    nodes[n].y, z, incident[n].size()));
    }

    std::vector<bool> used(segments.size(), false);
    std::vector<Contour> out;
    for (std::uint32_t start = 0; start < nodes.size(); ++start) {
        if (incident[start].empty())
            continue;
        std::uint32_t seg = incident[start][0];
        if (used[seg])
            continue;
        Contour c;
        std::uint32_t at = start;
        while (!used[seg]) {
            used[seg] = true;
            c.points.push_back(nodes[at]);
            at = segments[seg].first == at ? segments[seg].second : segments[seg].first;
            const auto& inc = incident[at];
            seg = inc[0] == seg ? inc[1] : inc[0];
        }
        if (at != start)
            throw Error(ErrorCode::OpenContour, fmt::format("contour does not close at z={:.6f}", z));
        if (c.points.size() >= 3)
            out.push_back(std::move(c));
    }
    return out;
}

std::size_t layer_count(const Assembly& assembly)
{
    const Box3 b = assembly.bounds();
    if (b.empty() || b.max.z <= 0)
        return 0;
    return static_cast<std::size_t>(std::ceil(b.max.z / assembly.layer_height - 1e-9));
}

LayerStack build_layer_stack(const Assembly& assembly, double eps)
{
    LayerStack stack;
    stack.layer_height = assembly.layer_height;
    const std::size_t n = layer_count(assembly);
    stack.layers.resize(n);

    std::vector<Box3> unit_bounds;
    for (const auto& u : assembly.units)
        unit_bounds.push_back(u.world_bounds());

    parallel_for(n, [&](std::size_t k) {
        Layer& layer = stack.layers[k];
        layer.index = k;
        layer.z = layer_z(k, assembly.layer_height);
        std::map<std::string, LayerSlice> by_material;
        for (std::size_t u = 0; u < assembly.units.size(); ++u) {
            const auto& unit = assembly.units[u];
            if (layer.z < unit_bounds[u].min.z - eps || layer.z > unit_bounds[u].max.z + eps)
                continue;
            std::vector<Contour> contours;
            try {
                contours = slice_at(*unit.mesh, unit.transform, layer.z, eps);
            } catch (const Error& e) {
                throw Error(e.code(), fmt::format("unit {} layer {}: {}", u, k, e.what()));
            }
            if (contours.empty())
                continue;
            LayerSlice& s = by_material[unit.material.id];
            s.z = layer.z;
            s.material = unit.material.id;
            for (auto& c : contours) {
                s.contours.push_back(std::move(c));
                s.group.push_back(static_cast<std::uint32_t>(u));
            }
        }
        for (auto& [id, s] : by_material)
            layer.slices.push_back(std::move(s));
    });
    return stack;
}

std::string format_layer_dump(const Layer& layer)
{
    std::string out = fmt::format("layer {} z {:.6f}\n", layer.index, layer.z);
    for (const auto& s : layer.slices) {
        out += fmt::format("material {} contours {}\n", s.material, s.contours.size());
        for (std::size_t i = 0; i < s.contours.size(); ++i) {
            const auto& c = s.contours[i];
            out += fmt::format("contour {} group {} points {}\n", i, s.group[i], c.points.size());
            for (const auto& p : c.points)
                out += fmt::format("{:.6f} {:.6f}\n", p.x, p.y);
        }
    }
    return out;
}

void write_layer_dump(const LayerStack& stack, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& layer : stack.layers) {
        const auto path = dir / fmt::format("layer{:05}.txt", layer.index);
        std::ofstream out(path, std::ios::binary);
        out << format_layer_dump(layer);
        if (!out)
            throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    }
}

} // namespace mmdlp
